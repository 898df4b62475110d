#include "ucbf/registry.hpp"

#include <cmath>

namespace ucbf {

namespace {

Vec vec1(double a) {
    Vec v(1);
    v << a;
    return v;
}

Vec vec2(double a, double b) {
    Vec v(2);
    v << a, b;
    return v;
}

double param(const ParamMap& params, const std::string& id, const std::string& name) {
    const auto it = params.find(name);
    if (it == params.end()) {
        throw ConfigError("barrier " + id + ": missing parameter " + name);
    }
    return it->second;
}

}  // namespace

DynamicsModel make_model(const std::string& id) {
    DynamicsModel m;
    m.id = id;
    if (id == "unmatched_2d") {
        m.n = 2;
        m.m = 1;
        m.p = 1;
        m.f = [](const Vec& x) { return vec2(x[1], 0.0); };
        m.delta = [](const Vec& x) {
            Mat d(1, 2);
            d << x[0], 0.0;
            return d;
        };
        m.g = [](const Vec&) {
            Mat g(2, 1);
            g << 0.0, 1.0;
            return g;
        };
        return m;
    }
    if (id == "scalar_drift") {
        m.n = 1;
        m.m = 1;
        m.p = 1;
        m.f = [](const Vec&) { return vec1(-1.0); };
        m.delta = [](const Vec& x) {
            Mat d(1, 1);
            d << -x[0];
            return d;
        };
        m.g = [](const Vec&) { return Mat::Ones(1, 1); };
        return m;
    }
    throw ConfigError("unknown model id: " + id);
}

std::vector<std::string> model_ids() {
    return {"unmatched_2d", "scalar_drift"};
}

ParamMap barrier_defaults(const std::string& id) {
    if (id == "ellipse_unmatched") return {{"c", 0.25}};
    if (id == "position_bound") return {};
    if (id == "racbf_scalar") return {{"k", 0.25}};
    throw ConfigError("unknown barrier id: " + id);
}

BarrierFamily make_barrier(const std::string& id, const ParamMap& params, const DynamicsModel& model) {
    const ParamMap defaults = barrier_defaults(id);
    for (const auto& [name, value] : params) {
        if (defaults.find(name) == defaults.end()) {
            throw ConfigError("barrier " + id + ": unknown parameter " + name);
        }
        if (!std::isfinite(value)) {
            throw ConfigError("barrier " + id + ": parameter " + name + " is not finite");
        }
    }
    ParamMap merged = defaults;
    for (const auto& [name, value] : params) {
        merged[name] = value;
    }

    BarrierFamily b;
    b.id = id;
    if (id == "ellipse_unmatched") {
        if (model.n != 2 || model.p != 1) {
            throw ConfigError("barrier ellipse_unmatched needs n = 2, p = 1");
        }
        const double c = param(merged, id, "c");
        if (!(c > 0.0)) {
            throw ConfigError("barrier ellipse_unmatched: c must be positive");
        }
        b.h.value = [c](const Vec& x, const Vec& th) {
            const double z = x[1] - th[0] * x[0];
            return 1.0 - x[0] * x[0] - c * z * z;
        };
        b.h.grad_x = [c](const Vec& x, const Vec& th) {
            const double z = x[1] - th[0] * x[0];
            return vec2(-2.0 * x[0] + 2.0 * c * th[0] * z, -2.0 * c * z);
        };
        b.h.grad_theta = [c](const Vec& x, const Vec& th) {
            const double z = x[1] - th[0] * x[0];
            return vec1(2.0 * c * z * x[0]);
        };
        return b;
    }
    if (id == "position_bound") {
        if (model.n != 2 || model.p != 1) {
            throw ConfigError("barrier position_bound needs n = 2, p = 1");
        }
        b.relative_degree = 2;
        b.h.value = [](const Vec& x, const Vec&) { return 1.0 - x[0] * x[0]; };
        b.h.grad_x = [](const Vec& x, const Vec&) { return vec2(-2.0 * x[0], 0.0); };
        b.h.grad_theta = [](const Vec&, const Vec&) { return vec1(0.0); };
        // hdot along x1dot = x2 - theta x1
        ScalarField hdot;
        hdot.value = [](const Vec& x, const Vec& th) { return -2.0 * x[0] * (x[1] - th[0] * x[0]); };
        hdot.grad_x = [](const Vec& x, const Vec& th) {
            return vec2(-2.0 * x[1] + 4.0 * th[0] * x[0], -2.0 * x[0]);
        };
        hdot.grad_theta = [](const Vec& x, const Vec&) { return vec1(2.0 * x[0] * x[0]); };
        b.derivative_chain.push_back(hdot);
        return b;
    }
    if (id == "racbf_scalar") {
        if (model.n != 1 || model.p != 1) {
            throw ConfigError("barrier racbf_scalar needs n = 1, p = 1");
        }
        const double k = param(merged, id, "k");
        b.h.value = [k](const Vec& x, const Vec& th) { return x[0] + 1.0 - k * th[0] * th[0]; };
        b.h.grad_x = [](const Vec&, const Vec&) { return vec1(1.0); };
        b.h.grad_theta = [k](const Vec&, const Vec& th) { return vec1(-2.0 * k * th[0]); };
        return b;
    }
    throw ConfigError("unknown barrier id: " + id);
}

std::vector<std::string> barrier_ids() {
    return {"ellipse_unmatched", "position_bound", "racbf_scalar"};
}

QuadraticClf make_quadratic_clf(const Vec& x_ref, int p) {
    QuadraticClf c;
    c.V.value = [x_ref](const Vec& x, const Vec&) { return 0.5 * (x - x_ref).squaredNorm(); };
    c.V.grad_x = [x_ref](const Vec& x, const Vec&) -> Vec { return x - x_ref; };
    c.V.grad_theta = [p](const Vec&, const Vec&) -> Vec { return Vec::Zero(p); };
    c.Q.value = [x_ref](const Vec& x, const Vec&) { return (x - x_ref).squaredNorm(); };
    c.Q.grad_x = [x_ref](const Vec& x, const Vec&) -> Vec { return 2.0 * (x - x_ref); };
    c.Q.grad_theta = [p](const Vec&, const Vec&) -> Vec { return Vec::Zero(p); };
    return c;
}

ClassKInfinity make_linear_cubic(double k) {
    if (!(k > 0.0)) {
        throw ConfigError("linear_cubic alpha: gain must be positive");
    }
    auto fwd = [k](double r) { return r < 0.0 ? r : r + k * r * r * r; };
    auto inv = [k](double y) {
        if (y <= 0.0) {
            return y;
        }
        // Cardano for k r^3 + r - y = 0, then Newton polish
        const double a = y / (2.0 * k);
        const double disc = std::sqrt(a * a + 1.0 / (27.0 * k * k * k));
        double r = std::cbrt(a + disc) + std::cbrt(a - disc);
        for (int i = 0; i < 3; ++i) {
            r -= (k * r * r * r + r - y) / (3.0 * k * r * r + 1.0);
        }
        return r;
    };
    return ClassKInfinity::user_supplied("linear_cubic", fwd, inv);
}

}  // namespace ucbf
