#include "ucbf/barrier.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <thread>

#include "ucbf/format.hpp"

namespace ucbf {

namespace {

double binomial(int n, int k) {
    double r = 1.0;
    for (int i = 1; i <= k; ++i) {
        r = r * (n - k + i) / i;
    }
    return r;
}

// Level i of the derivative chain, with level 0 being h itself.
const ScalarField& chain_level(const BarrierFamily& b, int i) {
    return i == 0 ? b.h : b.derivative_chain.at(static_cast<std::size_t>(i - 1));
}

void require_chain(const BarrierFamily& b) {
    if (b.relative_degree < 1) {
        throw ConfigError("barrier " + b.id + ": relative degree must be positive");
    }
    if (static_cast<int>(b.derivative_chain.size()) < b.relative_degree - 1) {
        throw ConfigError("barrier " + b.id + ": derivative chain shorter than relative degree - 1");
    }
}

}  // namespace

SlidingVariable SlidingVariable::make(const BarrierFamily& barrier, Kind kind, double lambda1,
                                      double lambda2, double q) {
    require_chain(barrier);
    if (!(lambda1 > 0.0)) {
        throw ConfigError("sliding variable: lambda1 must be positive");
    }
    if (kind == Kind::StateDependent && (!(lambda2 > 0.0) || !(q > 0.0))) {
        throw ConfigError("sliding variable: lambda2 and q must be positive");
    }
    SlidingVariable s;
    s.kind_ = kind;
    s.lambda1_ = lambda1;
    s.lambda2_ = lambda2;
    s.q_ = q;
    s.relative_degree_ = barrier.relative_degree;
    const int r = barrier.relative_degree;

    if (r == 1) {
        s.field_ = barrier.h;
        return s;
    }

    if (kind == Kind::StateDependent) {
        if (r != 2) {
            throw UnsupportedFeature("state-dependent sliding variable requires relative degree 2");
        }
        const ScalarField h = barrier.h;
        const ScalarField hd = barrier.derivative_chain[0];
        s.field_.value = [=](const Vec& x, const Vec& th) {
            const double hv = h.value(x, th);
            return hd.value(x, th) + (lambda1 + lambda2 * std::pow(std::abs(hv), q)) * hv;
        };
        auto slope = [=](double hv) { return lambda1 + lambda2 * (q + 1.0) * std::pow(std::abs(hv), q); };
        s.field_.grad_x = [=](const Vec& x, const Vec& th) -> Vec {
            return hd.grad_x(x, th) + slope(h.value(x, th)) * h.grad_x(x, th);
        };
        s.field_.grad_theta = [=](const Vec& x, const Vec& th) -> Vec {
            return hd.grad_theta(x, th) + slope(h.value(x, th)) * h.grad_theta(x, th);
        };
        return s;
    }

    // (d/dt + lambda)^(r-1) h = sum_i C(r-1, i) lambda^(r-1-i) h^(i)
    std::vector<double> weights(static_cast<std::size_t>(r));
    std::vector<ScalarField> levels;
    for (int i = 0; i < r; ++i) {
        weights[static_cast<std::size_t>(i)] = binomial(r - 1, i) * std::pow(lambda1, r - 1 - i);
        levels.push_back(chain_level(barrier, i));
    }
    s.field_.value = [=](const Vec& x, const Vec& th) {
        double acc = 0.0;
        for (std::size_t i = 0; i < levels.size(); ++i) {
            acc += weights[i] * levels[i].value(x, th);
        }
        return acc;
    };
    s.field_.grad_x = [=](const Vec& x, const Vec& th) -> Vec {
        Vec acc = weights[0] * levels[0].grad_x(x, th);
        for (std::size_t i = 1; i < levels.size(); ++i) {
            acc += weights[i] * levels[i].grad_x(x, th);
        }
        return acc;
    };
    s.field_.grad_theta = [=](const Vec& x, const Vec& th) -> Vec {
        Vec acc = weights[0] * levels[0].grad_theta(x, th);
        for (std::size_t i = 1; i < levels.size(); ++i) {
            acc += weights[i] * levels[i].grad_theta(x, th);
        }
        return acc;
    };
    return s;
}

double tightened_threshold(double gamma, const Vec& vartheta) {
    if (!(gamma > 0.0)) {
        throw ConfigError("tightened threshold: gamma must be positive");
    }
    return vartheta.squaredNorm() / (2.0 * gamma);
}

Vec racbf_modified_drift(const DynamicsModel& model, const ScalarField& barrier, const Vec& x,
                         const Vec& theta_hat, double gamma) {
    const Vec lambda = theta_hat - gamma * barrier.grad_theta(x, theta_hat);
    return eval_drift(model, x, lambda);
}

const Box& InputSet::require_box() const {
    if (kind != Kind::Box) {
        throw UnsupportedFeature("input set: only box-shaped input sets are supported");
    }
    return box;
}

std::vector<Vec> parameter_grid(const Box& theta_box, int points_per_axis) {
    const Eigen::Index p = theta_box.dim();
    std::size_t total = 1;
    for (Eigen::Index i = 0; i < p; ++i) {
        total *= static_cast<std::size_t>(points_per_axis);
    }
    std::vector<Vec> out;
    out.reserve(total);
    for (std::size_t k = 0; k < total; ++k) {
        Vec th(p);
        std::size_t rem = k;
        for (Eigen::Index i = 0; i < p; ++i) {
            const auto idx = static_cast<int>(rem % static_cast<std::size_t>(points_per_axis));
            rem /= static_cast<std::size_t>(points_per_axis);
            th[i] = points_per_axis == 1
                        ? 0.5 * (theta_box.lower[i] + theta_box.upper[i])
                        : theta_box.lower[i] +
                              (theta_box.upper[i] - theta_box.lower[i]) * idx / (points_per_axis - 1);
        }
        out.push_back(std::move(th));
    }
    return out;
}

double sup_over_box(const Vec& c, const Box& box) {
    const Vec mid = 0.5 * (box.lower + box.upper);
    const Vec half = 0.5 * (box.upper - box.lower);
    return c.dot(mid) + c.cwiseAbs().dot(half);
}

double condition_margin(const DynamicsModel& model, const ScalarField& field, const ClassKInfinity& alpha,
                        const Box& input_box, const Vec& x, const Vec& theta, double tighten,
                        std::optional<double> racbf_gamma) {
    const Vec grad = field.grad_x(x, theta);
    const Vec drift = racbf_gamma ? racbf_modified_drift(model, field, x, theta, *racbf_gamma)
                                  : eval_drift(model, x, theta);
    const Vec authority = model.g(x).transpose() * grad;
    return grad.dot(drift) + sup_over_box(authority, input_box) + alpha(field.value(x, theta) - tighten);
}

namespace {

struct PartialResult {
    std::size_t evaluated = 0;
    std::size_t in_domain = 0;
    double min_margin = std::numeric_limits<double>::infinity();
    std::size_t argmin_index = 0;
    std::size_t zero_authority = 0;
    double zero_authority_min = std::numeric_limits<double>::infinity();
};

Vec grid_point(const StateGrid& grid, std::size_t k) {
    const Eigen::Index n = grid.bounds.dim();
    Vec x(n);
    const auto ppa = static_cast<std::size_t>(grid.points_per_axis);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto idx = static_cast<double>(k % ppa);
        k /= ppa;
        x[i] = grid.points_per_axis == 1
                   ? 0.5 * (grid.bounds.lower[i] + grid.bounds.upper[i])
                   : grid.bounds.lower[i] +
                         (grid.bounds.upper[i] - grid.bounds.lower[i]) * idx / (grid.points_per_axis - 1);
    }
    return x;
}

}  // namespace

VerificationReport verify_ucbf_grid(const DynamicsModel& model, const ScalarField& barrier,
                                    const ClassKInfinity& alpha, const InputSet& input_set,
                                    const std::vector<Vec>& theta_grid, const StateGrid& x_grid,
                                    const VerifyOptions& options) {
    const Box& ubox = input_set.require_box();
    require_size(ubox.lower, model.m, "input box");
    require_size(x_grid.bounds.lower, model.n, "state grid");
    if (x_grid.points_per_axis < 1) {
        throw ConfigError("state grid: points_per_axis must be positive");
    }

    std::size_t x_total = 1;
    for (int i = 0; i < model.n; ++i) {
        x_total *= static_cast<std::size_t>(x_grid.points_per_axis);
    }
    const std::size_t total = x_total * theta_grid.size();

    auto work = [&](std::size_t begin, std::size_t end) {
        PartialResult r;
        for (std::size_t k = begin; k < end; ++k) {
            const Vec& th = theta_grid[k / x_total];
            const Vec x = grid_point(x_grid, k % x_total);
            ++r.evaluated;
            if (barrier.value(x, th) < options.domain_level) {
                continue;
            }
            if (options.also_nonnegative != nullptr && options.also_nonnegative->value(x, th) < 0.0) {
                continue;
            }
            ++r.in_domain;
            const double margin =
                condition_margin(model, barrier, alpha, ubox, x, th, options.tighten, options.racbf_gamma);
            if (margin < r.min_margin) {
                r.min_margin = margin;
                r.argmin_index = k;
            }
            const Vec authority = model.g(x).transpose() * barrier.grad_x(x, th);
            if (authority.cwiseAbs().maxCoeff() < options.authority_eps) {
                ++r.zero_authority;
                r.zero_authority_min = std::min(r.zero_authority_min, margin);
            }
        }
        return r;
    };

    const int jobs = std::max(1, options.jobs);
    std::vector<PartialResult> parts(static_cast<std::size_t>(jobs));
    if (jobs == 1) {
        parts[0] = work(0, total);
    } else {
        std::vector<std::thread> threads;
        const std::size_t chunk = (total + static_cast<std::size_t>(jobs) - 1) / static_cast<std::size_t>(jobs);
        for (int j = 0; j < jobs; ++j) {
            const std::size_t b = std::min(total, chunk * static_cast<std::size_t>(j));
            const std::size_t e = std::min(total, b + chunk);
            threads.emplace_back([&, j, b, e] { parts[static_cast<std::size_t>(j)] = work(b, e); });
        }
        for (auto& t : threads) {
            t.join();
        }
    }

    VerificationReport rep;
    rep.condition = options.racbf_gamma ? "sup_u grad^T[f - Delta^T Lambda + g u] + alpha(h - tighten) >= 0"
                                        : "sup_u grad^T[f - Delta^T theta + g u] + alpha(h - tighten) >= 0";
    std::ostringstream dom;
    dom << "grid points in state box with field >= " << fmt_double(options.domain_level);
    if (options.also_nonnegative != nullptr) {
        dom << " and h >= 0";
    }
    rep.domain = dom.str();
    rep.x_grid = x_grid;
    rep.theta_points = theta_grid.size();
    rep.input_box = ubox;

    // Parts cover increasing index ranges, so strict < keeps the smallest argmin index.
    std::size_t argmin = 0;
    for (const auto& part : parts) {
        rep.points_evaluated += part.evaluated;
        rep.points_in_domain += part.in_domain;
        rep.zero_authority_count += part.zero_authority;
        rep.zero_authority_min_margin = std::min(rep.zero_authority_min_margin, part.zero_authority_min);
        if (part.min_margin < rep.min_margin) {
            rep.min_margin = part.min_margin;
            argmin = part.argmin_index;
        }
    }
    if (rep.points_in_domain > 0) {
        rep.argmin_x = grid_point(x_grid, argmin % x_total);
        rep.argmin_theta = theta_grid[argmin / x_total];
    }
    rep.pass = rep.points_in_domain > 0 && rep.min_margin >= 0.0;
    if (rep.points_in_domain == 0) {
        rep.notes.emplace_back("no grid point inside the verification domain");
    }
    if (rep.zero_authority_count > 0) {
        rep.notes.emplace_back("zero-authority points present: the safety row is drift-only there");
    }
    return rep;
}

VerificationReport verify_houcbf_grid(const DynamicsModel& model, const BarrierFamily& barrier,
                                      const SlidingVariable& sliding, const ClassKInfinity& alpha,
                                      const InputSet& input_set, const std::vector<Vec>& theta_grid,
                                      const StateGrid& x_grid, VerifyOptions options) {
    if (barrier.relative_degree > 1) {
        options.also_nonnegative = &barrier.h;
    }
    auto rep = verify_ucbf_grid(model, sliding.field(), alpha, input_set, theta_grid, x_grid, options);
    rep.condition = "sup_u grad_s^T[f - Delta^T theta + g u] + alpha(s - tighten) >= 0";
    if (sliding.kind() == SlidingVariable::Kind::StateDependent) {
        rep.notes.emplace_back("initial-condition sets for state-dependent eigenvalues are not checked");
    }
    return rep;
}

std::vector<bool> initial_condition_sets_check(const BarrierFamily& barrier, const Vec& x0,
                                               const Vec& theta_hat0, double lambda) {
    require_chain(barrier);
    const int r = barrier.relative_degree;
    std::vector<double> derivs(static_cast<std::size_t>(r));
    for (int i = 0; i < r; ++i) {
        derivs[static_cast<std::size_t>(i)] = chain_level(barrier, i).value(x0, theta_hat0);
    }
    std::vector<bool> levels;
    for (int i = 0; i < r; ++i) {
        double acc = 0.0;
        for (int j = 0; j <= i; ++j) {
            acc += binomial(i, j) * std::pow(lambda, i - j) * derivs[static_cast<std::size_t>(j)];
        }
        levels.push_back(acc >= 0.0);
    }
    return levels;
}

std::optional<std::vector<bool>> initial_condition_sets_check(const SlidingVariable& sliding,
                                                              const BarrierFamily& barrier,
                                                              const Vec& x0, const Vec& theta_hat0) {
    if (sliding.kind() == SlidingVariable::Kind::StateDependent) {
        return std::nullopt;
    }
    return initial_condition_sets_check(barrier, x0, theta_hat0, sliding.lambda1());
}

double gradient_check(const ScalarField& field, const Box& x_box, const Box& theta_box, int samples,
                      unsigned seed, double step) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    auto draw = [&](const Box& b) {
        Vec v(b.dim());
        for (Eigen::Index i = 0; i < v.size(); ++i) {
            v[i] = b.lower[i] + unit(rng) * (b.upper[i] - b.lower[i]);
        }
        return v;
    };
    auto rel = [](const Vec& analytic, const Vec& numeric) {
        return (analytic - numeric).norm() / std::max(1.0, analytic.norm());
    };
    double worst = 0.0;
    for (int k = 0; k < samples; ++k) {
        const Vec x = draw(x_box);
        const Vec th = draw(theta_box);
        Vec fd_x(x.size());
        for (Eigen::Index i = 0; i < x.size(); ++i) {
            Vec xp = x, xm = x;
            xp[i] += step;
            xm[i] -= step;
            fd_x[i] = (field.value(xp, th) - field.value(xm, th)) / (2.0 * step);
        }
        Vec fd_th(th.size());
        for (Eigen::Index i = 0; i < th.size(); ++i) {
            Vec tp = th, tm = th;
            tp[i] += step;
            tm[i] -= step;
            fd_th[i] = (field.value(x, tp) - field.value(x, tm)) / (2.0 * step);
        }
        worst = std::max({worst, rel(field.grad_x(x, th), fd_x), rel(field.grad_theta(x, th), fd_th)});
    }
    return worst;
}

std::string VerificationReport::to_text() const {
    std::ostringstream os;
    os << "condition: " << condition << '\n';
    os << "domain: " << domain << '\n';
    os << "state_grid_lower: " << fmt_vec(x_grid.bounds.lower) << '\n';
    os << "state_grid_upper: " << fmt_vec(x_grid.bounds.upper) << '\n';
    os << "state_grid_points_per_axis: " << x_grid.points_per_axis << '\n';
    os << "theta_grid_points: " << theta_points << '\n';
    os << "input_box_lower: " << fmt_vec(input_box.lower) << '\n';
    os << "input_box_upper: " << fmt_vec(input_box.upper) << '\n';
    os << "points_evaluated: " << points_evaluated << '\n';
    os << "points_in_domain: " << points_in_domain << '\n';
    os << "min_margin: " << fmt_double(min_margin) << '\n';
    os << "argmin_x: " << fmt_vec(argmin_x) << '\n';
    os << "argmin_theta: " << fmt_vec(argmin_theta) << '\n';
    os << "zero_authority_count: " << zero_authority_count << '\n';
    os << "zero_authority_min_margin: " << fmt_double(zero_authority_min_margin) << '\n';
    os << "verdict: " << (pass ? "PASS" : "FAIL") << '\n';
    for (const auto& n : notes) {
        os << "note: " << n << '\n';
    }
    return os.str();
}

}  // namespace ucbf
