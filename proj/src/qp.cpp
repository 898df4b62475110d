#include "ucbf/qp.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/LU>

namespace ucbf {

std::string to_string(QPStatus status) {
    switch (status) {
    case QPStatus::Optimal: return "optimal";
    case QPStatus::Infeasible: return "infeasible";
    case QPStatus::UnboundedGuard: return "unbounded_guard";
    }
    return "optimal";
}

ConstraintRow safety_row(const DynamicsModel& model, const ScalarField& field, const ClassKInfinity& alpha,
                         const Vec& x, const Vec& theta_hat, double threshold) {
    const Vec grad = field.grad_x(x, theta_hat);
    ConstraintRow row;
    row.a = -(model.g(x).transpose() * grad);
    row.b = grad.dot(eval_drift(model, x, theta_hat)) + alpha(field.value(x, theta_hat) - threshold);
    row.kind = ConstraintRow::Kind::SafetyHard;
    return row;
}

ConstraintRow tracking_row(const DynamicsModel& model, const ScalarField& clf, const ScalarField& decay,
                           const Vec& x, const Vec& phi_hat) {
    const Vec grad = clf.grad_x(x, phi_hat);
    ConstraintRow row;
    row.a = model.g(x).transpose() * grad;
    row.b = -decay.value(x, phi_hat) - grad.dot(eval_drift(model, x, phi_hat));
    row.kind = ConstraintRow::Kind::TrackingSoft;
    return row;
}

Vec project_halfspace(const Vec& u, const Vec& a, double b) {
    const double excess = a.dot(u) - b;
    const double nrm2 = a.squaredNorm();
    if (excess <= 0.0 || nrm2 == 0.0) {
        return u;
    }
    return u - a * (excess / nrm2);
}

namespace {

// min 1/2 z^T diag(h) z + c^T z  s.t.  C z <= d.
struct Program {
    Vec h;
    Vec c;
    Mat C;
    Vec d;
    std::vector<int> labels;  // public constraint index per row of C
};

struct KktPoint {
    Vec z;
    std::vector<int> working;
    Vec mu;
};

constexpr double kFeasTol = 1e-10;
constexpr double kMultTol = 1e-10;

bool next_combination(std::vector<int>& idx, int n) {
    const int k = static_cast<int>(idx.size());
    for (int i = k - 1; i >= 0; --i) {
        if (idx[i] < n - k + i) {
            ++idx[i];
            for (int j = i + 1; j < k; ++j) {
                idx[j] = idx[j - 1] + 1;
            }
            return true;
        }
    }
    return false;
}

bool primal_feasible(const Program& p, const Vec& z) {
    const Vec r = p.C * z - p.d;
    for (Eigen::Index i = 0; i < r.size(); ++i) {
        if (r[i] > kFeasTol * (1.0 + std::abs(p.d[i]))) {
            return false;
        }
    }
    return true;
}

// Smallest working set (by size, then lexicographic order) whose equality-
// constrained minimizer is primal feasible with nonnegative multipliers.
// The program is strictly convex, so this point is the unique optimum.
std::optional<KktPoint> enumerate_working_sets(const Program& p) {
    const int nv = static_cast<int>(p.h.size());
    const int nc = static_cast<int>(p.C.rows());
    const Vec hinv = p.h.cwiseInverse();
    const Vec z_free = -p.c.cwiseProduct(hinv);

    for (int k = 0; k <= std::min(nv, nc); ++k) {
        std::vector<int> idx(static_cast<std::size_t>(k));
        for (int i = 0; i < k; ++i) {
            idx[static_cast<std::size_t>(i)] = i;
        }
        do {
            if (k == 0) {
                if (primal_feasible(p, z_free)) {
                    return KktPoint{z_free, {}, Vec()};
                }
                continue;
            }
            Mat cw(k, nv);
            Vec dw(k);
            for (int i = 0; i < k; ++i) {
                cw.row(i) = p.C.row(idx[static_cast<std::size_t>(i)]);
                dw[i] = p.d[idx[static_cast<std::size_t>(i)]];
            }
            const Mat cwh = cw * hinv.asDiagonal();
            const Mat m = cwh * cw.transpose();
            Eigen::FullPivLU<Mat> lu(m);
            lu.setThreshold(1e-12);
            if (lu.rank() < k) {
                continue;
            }
            const Vec mu = -lu.solve(dw + cwh * p.c);
            if ((mu.array() < -kMultTol * (1.0 + mu.cwiseAbs().maxCoeff())).any()) {
                continue;
            }
            const Vec z = -hinv.cwiseProduct(p.c + cw.transpose() * mu);
            if (!primal_feasible(p, z)) {
                continue;
            }
            return KktPoint{z, idx, mu.cwiseMax(0.0)};
        } while (next_combination(idx, nc));
    }
    return std::nullopt;
}

double kkt_residual(const Program& p, const KktPoint& pt) {
    Vec stat = p.h.cwiseProduct(pt.z) + p.c;
    double comp = 0.0;
    for (std::size_t i = 0; i < pt.working.size(); ++i) {
        const int row = pt.working[i];
        stat += pt.mu[static_cast<Eigen::Index>(i)] * p.C.row(row).transpose();
        comp = std::max(comp, std::abs(pt.mu[static_cast<Eigen::Index>(i)] * (p.C.row(row).dot(pt.z) - p.d[row])));
    }
    double viol = 0.0;
    if (p.C.rows() > 0) {
        viol = std::max(0.0, (p.C * pt.z - p.d).maxCoeff());
    }
    return std::max({stat.cwiseAbs().maxCoeff(), comp, viol});
}

bool rows_finite(const std::vector<ConstraintRow>& rows, Eigen::Index m) {
    for (const auto& r : rows) {
        if (r.a.size() != m) {
            throw DomainError("qp: row dimension " + std::to_string(r.a.size()) + " does not match input dimension " +
                              std::to_string(m));
        }
        if (!r.a.allFinite() || !std::isfinite(r.b)) {
            return false;
        }
    }
    return true;
}

void append_box(Program& p, const std::optional<Box>& box, int m, int first_label) {
    if (!box) {
        return;
    }
    require_size(box->lower, m, "input box");
    const int nv = static_cast<int>(p.h.size());
    for (int side = 0; side < 2; ++side) {
        for (int i = 0; i < m; ++i) {
            const double bound = side == 0 ? box->upper[i] : box->lower[i];
            const int label = first_label + side * m + i;
            if (!std::isfinite(bound)) {
                continue;
            }
            const Eigen::Index r = p.C.rows();
            p.C.conservativeResize(r + 1, nv);
            p.d.conservativeResize(r + 1);
            p.C.row(r).setZero();
            p.C(r, i) = side == 0 ? 1.0 : -1.0;
            p.d[r] = side == 0 ? bound : -bound;
            p.labels.push_back(label);
        }
    }
}

// Shared slack t on all safety rows with box kept hard; returns the violated rows.
std::pair<Vec, std::vector<int>> least_violation(const std::vector<ConstraintRow>& rows, const Vec& u_target,
                                                 const std::optional<Box>& box, int m) {
    Program p;
    p.h = Vec::Ones(m + 1);
    p.h[m] = 2e6;
    p.c = Vec::Zero(m + 1);
    p.c.head(m) = -u_target;
    std::vector<int> safety;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].kind == ConstraintRow::Kind::SafetyHard) {
            safety.push_back(static_cast<int>(i));
        }
    }
    const auto ns = static_cast<Eigen::Index>(safety.size());
    p.C = Mat::Zero(ns + 1, m + 1);
    p.d = Vec::Zero(ns + 1);
    for (Eigen::Index i = 0; i < ns; ++i) {
        const auto& r = rows[static_cast<std::size_t>(safety[static_cast<std::size_t>(i)])];
        p.C.row(i).head(m) = r.a.transpose();
        p.C(i, m) = -1.0;
        p.d[i] = r.b;
        p.labels.push_back(safety[static_cast<std::size_t>(i)]);
    }
    p.C(ns, m) = -1.0;
    p.labels.push_back(-1);
    append_box(p, box, m, 0);

    Vec u = box ? box->clamp(u_target) : u_target;
    if (auto pt = enumerate_working_sets(p)) {
        u = pt->z.head(m);
    }
    std::vector<int> violated;
    for (int idx : safety) {
        const auto& r = rows[static_cast<std::size_t>(idx)];
        if (r.a.dot(u) - r.b > 1e-9 * (1.0 + std::abs(r.b))) {
            violated.push_back(idx);
        }
    }
    return {u, violated};
}

QPSolution solve_program(const std::vector<ConstraintRow>& rows, const Vec& u_target, double slack_weight,
                         const std::optional<Box>& box, bool allow_tracking) {
    const auto m = static_cast<int>(u_target.size());
    QPSolution out;
    out.u = Vec::Zero(m);

    if (!u_target.allFinite() || !rows_finite(rows, m)) {
        out.status = QPStatus::UnboundedGuard;
        out.kkt_residual = std::numeric_limits<double>::infinity();
        return out;
    }

    const bool has_tracking = std::any_of(rows.begin(), rows.end(), [](const ConstraintRow& r) {
        return r.kind == ConstraintRow::Kind::TrackingSoft;
    });
    if (has_tracking && !allow_tracking) {
        throw ConfigError("pointwise filter accepts safety rows only");
    }
    const int nv = has_tracking ? m + 1 : m;
    const auto nr = static_cast<int>(rows.size());

    Program p;
    p.h = Vec::Ones(nv);
    p.c = Vec::Zero(nv);
    p.c.head(m) = -u_target;
    if (has_tracking) {
        p.h[m] = 2.0 * slack_weight;
    }
    p.C = Mat::Zero(nr + (has_tracking ? 1 : 0), nv);
    p.d = Vec::Zero(p.C.rows());
    for (int i = 0; i < nr; ++i) {
        const auto& r = rows[static_cast<std::size_t>(i)];
        p.C.row(i).head(m) = r.a.transpose();
        if (r.kind == ConstraintRow::Kind::TrackingSoft) {
            p.C(i, m) = -1.0;
        }
        p.d[i] = r.b;
        p.labels.push_back(i);
    }
    if (has_tracking) {
        p.C(nr, m) = -1.0;
        p.labels.push_back(nr);
    }
    append_box(p, box, m, nr + (has_tracking ? 1 : 0));

    const auto pt = enumerate_working_sets(p);
    if (!pt) {
        auto [u, violated] = least_violation(rows, u_target, box, m);
        out.u = u;
        out.status = QPStatus::Infeasible;
        out.certificate_rows = std::move(violated);
        out.kkt_residual = std::numeric_limits<double>::infinity();
        return out;
    }
    out.u = pt->z.head(m);
    out.delta = has_tracking ? std::max(0.0, pt->z[m]) : 0.0;
    for (std::size_t i = 0; i < pt->working.size(); ++i) {
        out.active_set.push_back(p.labels[static_cast<std::size_t>(pt->working[i])]);
        out.multipliers.push_back(pt->mu[static_cast<Eigen::Index>(i)]);
    }
    out.kkt_residual = kkt_residual(p, *pt);
    if (!out.u.allFinite() || !std::isfinite(out.kkt_residual)) {
        out.status = QPStatus::UnboundedGuard;
    }
    return out;
}

}  // namespace

QPSolution solve_min_norm(const std::vector<ConstraintRow>& rows, double slack_weight,
                          const std::optional<Box>& input_box) {
    if (!(slack_weight > 0.0)) {
        throw ConfigError("qp: slack weight must be positive");
    }
    Eigen::Index m = 0;
    if (!rows.empty()) {
        m = rows.front().a.size();
    } else if (input_box) {
        m = input_box->dim();
    }
    return solve_program(rows, Vec::Zero(m), slack_weight, input_box, true);
}

QPSolution pointwise_filter(const Vec& u_nominal, const std::vector<ConstraintRow>& rows,
                            const std::optional<Box>& input_box) {
    return solve_program(rows, u_nominal, 1.0, input_box, false);
}

}  // namespace ucbf
