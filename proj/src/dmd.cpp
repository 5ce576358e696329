#include "delaydmd/dmd.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <numbers>

#include "delaydmd/errors.hpp"

namespace delaydmd {

namespace {

std::string short_double(double x) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, res.ptr);
}

struct Truncation {
    Eigen::Index rank = 0;
    Eigen::Index requested = 0;
    std::optional<std::string> warning;
};

Truncation truncate(const Vector& sigma, const RankPolicy& policy) {
    if (sigma.size() == 0 || !(sigma(0) > 0.0)) {
        fail(ErrorCode::DegenerateData, "all singular values are zero");
    }
    const auto count_above = [&](double rel) {
        Eigen::Index n = 0;
        while (n < sigma.size() && sigma(n) > rel * sigma(0)) ++n;
        return n;
    };

    Truncation t;
    if (policy.mode == RankPolicy::Mode::RelativeThreshold) {
        t.rank = t.requested = count_above(policy.tol);
        return t;
    }
    t.requested = policy.rank;
    const Eigen::Index usable = count_above(kPinvCutoff);
    t.rank = std::min(policy.rank, usable);
    if (t.rank < policy.rank) {
        t.warning = "requested rank " + std::to_string(policy.rank) + " reduced to " + std::to_string(t.rank) +
                    " (singular values below " + short_double(kPinvCutoff) + " * sigma_1)";
    }
    return t;
}

// Shared tail of every pipeline once the reduced operator is known.
struct ReducedFit {
    ComplexVector mu;
    ComplexMatrix w;  // eigenvectors of the reduced operator, kept columns only
    std::vector<std::string> warnings;
};

ReducedFit reduced_eigs(const Matrix& s_tilde) {
    const EigResult eig = eig_dense(s_tilde);
    ReducedFit out;
    std::vector<Eigen::Index> keep;
    for (Eigen::Index k = 0; k < eig.eigenvalues.size(); ++k) {
        if (std::abs(eig.eigenvalues(k)) >= kZeroEigenvalue) keep.push_back(k);
    }
    if (static_cast<Eigen::Index>(keep.size()) < eig.eigenvalues.size()) {
        out.warnings.push_back("dropped " + std::to_string(eig.eigenvalues.size() - static_cast<Eigen::Index>(keep.size())) +
                               " eigenvalue(s) with modulus below " + short_double(kZeroEigenvalue));
    }
    if (keep.empty()) fail(ErrorCode::DegenerateData, "every eigenvalue of the reduced operator is zero");
    out.mu.resize(static_cast<Eigen::Index>(keep.size()));
    out.w.resize(eig.eigenvectors.rows(), static_cast<Eigen::Index>(keep.size()));
    for (size_t i = 0; i < keep.size(); ++i) {
        out.mu(static_cast<Eigen::Index>(i)) = eig.eigenvalues(keep[i]);
        out.w.col(static_cast<Eigen::Index>(i)) = eig.eigenvectors.col(keep[i]);
    }
    return out;
}

ComplexVector exponents_of(const ComplexVector& mu, double dt) {
    ComplexVector omega(mu.size());
    for (Eigen::Index k = 0; k < mu.size(); ++k) {
        Complex l = std::log(mu(k));
        // principal branch on (-pi, pi]
        if (l.imag() <= -std::numbers::pi) l = Complex(l.real(), std::numbers::pi);
        omega(k) = l / dt;
    }
    return omega;
}

void require_nonzero_initial(const Eigen::Ref<const Vector>& x1) {
    if (!(x1.norm() > 0.0)) {
        fail(ErrorCode::ZeroInitialCondition,
             "initial snapshot is identically zero, so the mode amplitudes would all vanish; "
             "start the fit at a later snapshot or use a delay embedding");
    }
}

// SVD of y1, truncation, and the reduced operator U* y2 V Sigma^-1.
struct Projected {
    Matrix u, v;
    Vector sigma;
    Matrix s_tilde;
    Truncation trunc;
};

Projected reduce(const Eigen::Ref<const Matrix>& y1, const Eigen::Ref<const Matrix>& y2, const RankPolicy& policy) {
    if (y1.rows() != y2.rows() || y1.cols() != y2.cols()) {
        fail(ErrorCode::Shape, "snapshot pair shapes differ");
    }
    if (y1.cols() < 1) fail(ErrorCode::InsufficientSnapshots, "need at least one snapshot pair");
    policy.validate();
    SvdResult svd = thin_svd(y1);
    Projected p;
    p.trunc = truncate(svd.singular_values, policy);
    const Eigen::Index r = p.trunc.rank;
    p.u = svd.u.leftCols(r);
    p.v = svd.v.leftCols(r);
    p.sigma = svd.singular_values.head(r);
    p.s_tilde = (p.u.transpose() * y2) * p.v * p.sigma.cwiseInverse().asDiagonal();
    return p;
}

DmdModel finish_model(ComplexMatrix modes, const ReducedFit& fit, const Eigen::Ref<const Vector>& x1, double dt,
                      double t0) {
    DmdModel m;
    m.amplitudes = pseudoinverse_apply(modes, x1.cast<Complex>());
    m.modes = std::move(modes);
    m.eigenvalues = fit.mu;
    m.exponents = exponents_of(fit.mu, dt);
    m.rank = fit.mu.size();
    m.dt = dt;
    m.t0 = t0;
    m.warnings = fit.warnings;
    return m;
}

}  // namespace

RankPolicy RankPolicy::fixed(Eigen::Index r) {
    RankPolicy p;
    p.mode = Mode::Fixed;
    p.rank = r;
    p.validate();
    return p;
}

RankPolicy RankPolicy::threshold(double tol) {
    RankPolicy p;
    p.mode = Mode::RelativeThreshold;
    p.tol = tol;
    p.validate();
    return p;
}

void RankPolicy::validate() const {
    if (mode == Mode::Fixed && rank < 1) fail(ErrorCode::InvalidParameter, "fixed rank must be >= 1");
    if (mode == Mode::RelativeThreshold && !(tol > 0.0 && tol < 1.0)) {
        fail(ErrorCode::InvalidParameter, "rank threshold must lie in (0, 1)");
    }
}

std::string RankPolicy::to_string() const {
    if (mode == Mode::Fixed) return "fixed:" + std::to_string(rank);
    return "tol:" + short_double(tol);
}

RankPolicy RankPolicy::parse(std::string_view text) {
    const auto colon = text.find(':');
    if (colon == std::string_view::npos) {
        fail(ErrorCode::Parse, "rank policy \"" + std::string(text) + "\" must be fixed:R or tol:T");
    }
    const std::string_view head = text.substr(0, colon);
    const std::string_view value = text.substr(colon + 1);
    if (head == "fixed") {
        Eigen::Index r = 0;
        auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), r);
        if (ec != std::errc{} || ptr != value.data() + value.size()) {
            fail(ErrorCode::Parse, "rank policy: bad fixed rank \"" + std::string(value) + "\"");
        }
        return fixed(r);
    }
    if (head == "tol") {
        double t = 0.0;
        auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), t);
        if (ec != std::errc{} || ptr != value.data() + value.size()) {
            fail(ErrorCode::Parse, "rank policy: bad tolerance \"" + std::string(value) + "\"");
        }
        return threshold(t);
    }
    fail(ErrorCode::Parse, "rank policy \"" + std::string(text) + "\" must be fixed:R or tol:T");
}

std::string DmdModel::tag() const {
    switch (variant) {
        case VariantKind::Classic: return "classic";
        case VariantKind::Tdc: return "tdc";
        case VariantKind::Projected:
            return "projected:" + std::string(to_string(projection.value_or(ProjectionKind::Identity)));
    }
    return "unknown";
}

DmdModel dmd_classic(const Eigen::Ref<const Matrix>& x1, const Eigen::Ref<const Matrix>& x2, double dt,
                     const RankPolicy& policy, double t0) {
    if (!(dt > 0.0)) fail(ErrorCode::InvalidParameter, "dt must be positive");
    if (x1.cols() < 1) fail(ErrorCode::InsufficientSnapshots, "need at least one snapshot pair");
    require_nonzero_initial(x1.col(0));
    Projected p = reduce(x1, x2, policy);
    ReducedFit fit = reduced_eigs(p.s_tilde);
    if (p.trunc.warning) fit.warnings.insert(fit.warnings.begin(), *p.trunc.warning);
    ComplexMatrix modes = p.u.cast<Complex>() * fit.w;
    DmdModel m = finish_model(std::move(modes), fit, x1.col(0), dt, t0);
    m.base_m = x1.rows();
    m.q = 1;
    m.variant = VariantKind::Classic;
    return m;
}

DmdModel dmd_tdc(const SnapshotMatrix& x, Eigen::Index q, const RankPolicy& policy) {
    const HankelPair h = hankel_augment(x, q);
    DmdModel m = dmd_classic(h.x1_aug, h.x2_aug, x.dt(), policy, x.t0());
    m.q = q;
    m.base_m = x.m();
    m.variant = VariantKind::Tdc;
    return m;
}

DmdModel dmd_projected(const SnapshotMatrix& x, Eigen::Index q, const ProjectionOperator& r,
                       const RankPolicy& policy, bool project_before_augment) {
    const HankelPair h = hankel_augment(x, q);
    require_nonzero_initial(h.x1_aug.col(0));

    Matrix z1, z2;
    if (project_before_augment) {
        if (r.cols() != x.m()) {
            fail(ErrorCode::Shape, "dmd_projected: operator has " + std::to_string(r.cols()) +
                                       " columns, expected M = " + std::to_string(x.m()));
        }
        HankelPair hz = hankel_augment(apply(r, x.data()), q);
        z1 = std::move(hz.x1_aug);
        z2 = std::move(hz.x2_aug);
    } else {
        if (r.cols() != q * x.m()) {
            fail(ErrorCode::Shape, "dmd_projected: operator has " + std::to_string(r.cols()) +
                                       " columns, expected qM = " + std::to_string(q * x.m()));
        }
        z1 = apply(r, h.x1_aug);
        z2 = apply(r, h.x2_aug);
    }

    Projected p = reduce(z1, z2, policy);
    const Eigen::Index budget = r.rows() * q;
    if (p.trunc.requested > budget) {
        fail(ErrorCode::InsufficientMeasurements,
             "truncation rank " + std::to_string(p.trunc.requested) + " exceeds a*q = " + std::to_string(r.rows()) +
                 "*" + std::to_string(q) + " = " + std::to_string(budget) + "; the condition aq >= r must hold");
    }
    ReducedFit fit = reduced_eigs(p.s_tilde);
    if (p.trunc.warning) fit.warnings.insert(fit.warnings.begin(), *p.trunc.warning);

    // Full-space modes from the unprojected second matrix.
    const Matrix lift = h.x2_aug * (p.v * p.sigma.cwiseInverse().asDiagonal());
    ComplexMatrix modes = lift.cast<Complex>() * fit.w;
    DmdModel m = finish_model(std::move(modes), fit, h.x1_aug.col(0), x.dt(), x.t0());
    m.q = q;
    m.base_m = x.m();
    m.variant = VariantKind::Projected;
    m.projection = r.kind();
    m.measurements = r.rows();
    for (const auto& w : r.warnings()) m.warnings.push_back(w);
    return m;
}

Vector predict_at(const DmdModel& model, double t) {
    if (model.modes.cols() != model.rank || model.modes.rows() < model.base_m) {
        fail(ErrorCode::Shape, "predict: model carries no modes (load them with the modes CSV)");
    }
    const double tau = t - model.t0;
    ComplexVector coeff(model.rank);
    for (Eigen::Index k = 0; k < model.rank; ++k) coeff(k) = std::exp(model.exponents(k) * tau) * model.amplitudes(k);
    return (model.modes.topRows(model.base_m) * coeff).real();
}

Vector predict(const DmdModel& model, Eigen::Index k) {
    return predict_at(model, model.t0 + static_cast<double>(k) * model.dt);
}

Matrix pod_modes(const SnapshotMatrix& x, const RankPolicy& policy) {
    if (x.n() < 2) fail(ErrorCode::InsufficientSnapshots, "pod_modes: need at least 2 snapshots");
    policy.validate();
    const SvdResult svd = thin_svd(x.data());
    const Truncation t = truncate(svd.singular_values, policy);
    return svd.u.leftCols(t.rank);
}

std::string_view to_string(CirclePosition c) {
    switch (c) {
        case CirclePosition::Inside: return "inside";
        case CirclePosition::On: return "on";
        case CirclePosition::Outside: return "outside";
    }
    return "unknown";
}

CirclePosition circle_position_from_string(std::string_view s) {
    if (s == "inside") return CirclePosition::Inside;
    if (s == "on") return CirclePosition::On;
    if (s == "outside") return CirclePosition::Outside;
    fail(ErrorCode::Parse, "unknown circle position \"" + std::string(s) + "\"");
}

CirclePosition classify(const Complex& mu) {
    const double r = std::abs(mu);
    if (r < 1.0 - kUnitCircleBand) return CirclePosition::Inside;
    if (r > 1.0 + kUnitCircleBand) return CirclePosition::Outside;
    return CirclePosition::On;
}

std::vector<SpectrumEntry> spectrum(const DmdModel& model) {
    std::vector<SpectrumEntry> out;
    out.reserve(static_cast<size_t>(model.rank));
    for (Eigen::Index k = 0; k < model.eigenvalues.size(); ++k) {
        const Complex mu = model.eigenvalues(k);
        out.push_back({mu, model.exponents(k), std::abs(model.amplitudes(k)), classify(mu)});
    }
    std::stable_sort(out.begin(), out.end(),
                     [](const SpectrumEntry& a, const SpectrumEntry& b) { return eigen_order_less(a.mu, b.mu); });
    return out;
}

std::vector<Eigen::Index> conjugate_pairs(const ComplexVector& mu) {
    const Eigen::Index n = mu.size();
    std::vector<Eigen::Index> partner(static_cast<size_t>(n), -1);
    for (Eigen::Index i = 0; i < n; ++i) {
        if (partner[static_cast<size_t>(i)] >= 0) continue;
        Eigen::Index best = i;
        double best_d = std::numeric_limits<double>::infinity();
        for (Eigen::Index j = i; j < n; ++j) {
            if (partner[static_cast<size_t>(j)] >= 0) continue;
            const double d = std::abs(mu(i) - std::conj(mu(j)));
            if (d < best_d) {
                best_d = d;
                best = j;
            }
        }
        partner[static_cast<size_t>(i)] = best;
        partner[static_cast<size_t>(best)] = i;
    }
    return partner;
}

double conjugate_closure_defect(const ComplexVector& mu) {
    const auto partner = conjugate_pairs(mu);
    double worst = 0.0;
    for (Eigen::Index i = 0; i < mu.size(); ++i) {
        worst = std::max(worst, std::abs(mu(i) - std::conj(mu(partner[static_cast<size_t>(i)]))));
    }
    return worst;
}

}  // namespace delaydmd
