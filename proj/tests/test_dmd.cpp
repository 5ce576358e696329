#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "delaydmd/dmd.hpp"
#include "delaydmd/problems.hpp"
#include "test_util.hpp"

using namespace delaydmd;
using testutil::error_code_of;
using testutil::random_matrix;

namespace {

// Largest distance from an element of `a` to its nearest element of `b`.
double spectrum_distance(const ComplexVector& a, const ComplexVector& b) {
    double worst = 0.0;
    for (Eigen::Index i = 0; i < a.size(); ++i) {
        double best = std::numeric_limits<double>::infinity();
        for (Eigen::Index j = 0; j < b.size(); ++j) best = std::min(best, std::abs(a(i) - b(j)));
        worst = std::max(worst, best);
    }
    return worst;
}

SnapshotMatrix simulate(const Matrix& a, const Vector& x0, Eigen::Index n, double dt = 1.0) {
    Matrix x(a.rows(), n);
    x.col(0) = x0;
    for (Eigen::Index k = 1; k < n; ++k) x.col(k) = a * x.col(k - 1);
    return SnapshotMatrix(x, dt);
}

// Random matrix rescaled to spectral radius 0.95.
Matrix random_stable(Eigen::Index m, std::uint64_t seed) {
    Matrix a = random_matrix(m, m, seed);
    const double rho = eig_dense(a).eigenvalues.cwiseAbs().maxCoeff();
    return a * (0.95 / rho);
}

}  // namespace

TEST_CASE("rank policy") {
    CHECK(RankPolicy{}.to_string() == "tol:1e-10");
    CHECK(RankPolicy::parse("fixed:20") == RankPolicy::fixed(20));
    CHECK(RankPolicy::parse("tol:1e-8") == RankPolicy::threshold(1e-8));
    CHECK(RankPolicy::parse(RankPolicy::fixed(7).to_string()) == RankPolicy::fixed(7));
    CHECK(error_code_of([] { RankPolicy::parse("fixed:x"); }) == ErrorCode::Parse);
    CHECK(error_code_of([] { RankPolicy::parse("best"); }) == ErrorCode::Parse);
    CHECK(error_code_of([] { RankPolicy::fixed(0).validate(); }) == ErrorCode::InvalidParameter);
}

TEST_CASE("classic DMD on scalar doubling") {
    Matrix x1(1, 2), x2(1, 2);
    x1 << 1, 2;
    x2 << 2, 4;
    const auto m = dmd_classic(x1, x2, 1.0);
    REQUIRE(m.rank == 1);
    CHECK(std::abs(m.eigenvalues(0) - Complex(2.0, 0.0)) < 1e-14);
    CHECK(std::abs(std::abs(m.modes(0, 0)) - 1.0) < 1e-14);
    CHECK(std::abs(m.exponents(0) - Complex(std::log(2.0), 0.0)) < 1e-14);
    CHECK(m.tag() == "classic");
}

TEST_CASE("classic DMD on static data") {
    const Matrix x = random_matrix(5, 3, 4);
    const auto m = dmd_classic(x, x, 0.1);
    for (Eigen::Index k = 0; k < m.rank; ++k) {
        CHECK(std::abs(m.eigenvalues(k) - Complex(1.0, 0.0)) < 1e-12);
        CHECK(std::abs(m.exponents(k)) < 1e-10);
    }
    for (Eigen::Index k : {0, 1, 5, 40}) CHECK((predict(m, k) - x.col(0)).norm() < 1e-10 * x.col(0).norm());
}

TEST_CASE("classic DMD recovers diag(0.9, 0.5)") {
    Matrix a = Matrix::Zero(2, 2);
    a(0, 0) = 0.9;
    a(1, 1) = 0.5;
    const auto x = simulate(a, Vector::Ones(2), 10);
    const auto [x1, x2] = split(x);
    const auto m = dmd_classic(x1, x2, 1.0);
    REQUIRE(m.rank == 2);
    CHECK(std::abs(m.eigenvalues(0) - Complex(0.9, 0.0)) < 1e-10);
    CHECK(std::abs(m.eigenvalues(1) - Complex(0.5, 0.0)) < 1e-10);

    CHECK((predict(m, 0) - Vector::Ones(2)).norm() < 1e-10);
    const Vector p3 = predict(m, 3);
    CHECK(std::abs(p3(0) - std::pow(0.9, 3)) < 1e-10);
    CHECK(std::abs(p3(1) - std::pow(0.5, 3)) < 1e-10);
}

TEST_CASE("classic DMD errors") {
    Matrix x1 = Matrix::Ones(3, 4);
    x1.col(0).setZero();
    CHECK(error_code_of([&] { dmd_classic(x1, x1, 1.0); }) == ErrorCode::ZeroInitialCondition);
    CHECK(error_code_of([] { dmd_classic(Matrix::Zero(3, 2), Matrix::Zero(3, 2), 1.0); }) ==
          ErrorCode::ZeroInitialCondition);
    CHECK(error_code_of([] { dmd_classic(Matrix::Ones(3, 2), Matrix::Ones(2, 2), 1.0); }) == ErrorCode::Shape);
}

TEST_CASE("linear-system oracle") {
    for (Eigen::Index m = 2; m <= 5; ++m) {
        for (std::uint64_t seed = 1; seed <= 5; ++seed) {
            CAPTURE(m);
            CAPTURE(seed);
            const Matrix a = random_stable(m, 100 * m + seed);
            const auto x = simulate(a, random_matrix(m, 1, seed).col(0), 2 * m + 4);
            const auto model = dmd_tdc(x, 1);
            const ComplexVector truth = eig_dense(a).eigenvalues;
            CHECK(model.rank == m);
            CHECK(spectrum_distance(model.eigenvalues, truth) < 1e-8);
            CHECK(spectrum_distance(truth, model.eigenvalues) < 1e-8);
        }
    }
}

TEST_CASE("q = 1 TDC reduces to classic DMD") {
    const auto x = simulate(random_stable(4, 3), Vector::Ones(4), 12, 0.1);
    const auto [x1, x2] = split(x);
    const auto c = dmd_classic(x1, x2, 0.1);
    const auto t = dmd_tdc(x, 1);
    REQUIRE(c.rank == t.rank);
    CHECK((c.eigenvalues - t.eigenvalues).cwiseAbs().maxCoeff() < 1e-10);
    CHECK(t.tag() == "tdc");
}

TEST_CASE("delay embedding gives a scalar cosine its conjugate pair") {
    const double theta = 0.3;
    Matrix row(1, 20);
    for (Eigen::Index k = 0; k < 20; ++k) row(0, k) = std::cos(theta * k);
    const SnapshotMatrix x(row, 1.0);

    const auto classic = dmd_tdc(x, 1);
    CHECK(classic.rank == 1);
    CHECK(std::abs(classic.eigenvalues(0).imag()) == 0.0);

    const auto m = dmd_tdc(x, 2);
    REQUIRE(m.rank == 2);
    CHECK(std::abs(m.eigenvalues(0) - std::polar(1.0, theta)) < 1e-8);
    CHECK(std::abs(m.eigenvalues(1) - std::polar(1.0, -theta)) < 1e-8);
    // frequency extraction for a pure sinusoid
    const double f = theta / (2 * std::numbers::pi);
    CHECK(std::abs(m.exponents(0).imag() / (2 * std::numbers::pi) - f) < 1e-3 * f);
    for (Eigen::Index k = 0; k < 20; ++k) CHECK(std::abs(predict(m, k)(0) - row(0, k)) < 1e-8);
}

TEST_CASE("identity sketch reproduces TDC") {
    const auto x = simulate(random_stable(5, 8), Vector::LinSpaced(5, 1, 2), 16);
    for (Eigen::Index q : {1, 2, 3}) {
        CAPTURE(q);
        const auto t = dmd_tdc(x, q);
        const auto p = dmd_projected(x, q, ProjectionOperator::identity(q * 5));
        REQUIRE(t.rank == p.rank);
        CHECK((t.eigenvalues - p.eigenvalues).cwiseAbs().maxCoeff() < 1e-10);
        CHECK(p.tag() == "projected:identity");
        CHECK(p.measurements == q * 5);
    }
}

TEST_CASE("measurement guard") {
    // rank-2 data: two spatial patterns with independent time courses
    const Eigen::Index m = 30, n = 25;
    Matrix x(m, n);
    for (Eigen::Index k = 0; k < n; ++k)
        for (Eigen::Index i = 0; i < m; ++i)
            x(i, k) = std::sin(0.2 * i) * std::cos(0.4 * k) + std::cos(0.3 * i) * std::sin(0.4 * k + 0.1);
    const SnapshotMatrix s(x, 0.1);

    try {
        dmd_projected(s, 1, gaussian_operator(m, 1, 3), RankPolicy::fixed(2));
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::InsufficientMeasurements);
        CHECK(std::string(e.what()).find("aq >= r") != std::string::npos);
    }
    // a = 1, q = 2 on raw snapshots: aq = r = 2 is enough
    const auto ok = dmd_projected(s, 2, gaussian_operator(m, 1, 3), RankPolicy::fixed(2), true);
    CHECK(ok.rank == 2);
    CHECK(std::abs(std::abs(ok.eigenvalues(0)) - 1.0) < 1e-8);
    CHECK(std::abs(std::arg(ok.eigenvalues(0))) == doctest::Approx(0.4).epsilon(1e-8));
}

TEST_CASE("projected fits recover full-space modes") {
    SignalParams p;
    p.grid = GridMeta{30, 30, -2, 2, -2, 2};
    p.t0 = p.dt;
    const auto x = generate_signal(p, 1);
    const auto tdc = dmd_tdc(x, 2);
    const Eigen::Index dim = 2 * x.m();
    for (const auto& r : {sampling_operator(dim, 40, 1), gaussian_operator(dim, 20, 2),
                          achlioptas_operator(dim, 20, 3, 3), krylov_operator(dim, 19, 4)}) {
        CAPTURE(to_string(r.kind()));
        const auto m = dmd_projected(x, 2, r);
        CHECK(m.rank == tdc.rank);
        CHECK(spectrum_distance(tdc.eigenvalues, m.eigenvalues) < 1e-8);
        CHECK(m.modes.rows() == dim);
        for (Eigen::Index k : {0, 10, 40}) CHECK((predict(m, k) - x.data().col(k)).norm() < 1e-8 * x.data().col(k).norm());
    }
}

TEST_CASE("projected fit rejects a zero first snapshot") {
    const auto x = generate_signal(SignalParams{.grid = GridMeta{10, 10, -2, 2, -2, 2}}, 1);
    CHECK(error_code_of([&] { dmd_projected(x, 1, sampling_operator(100, 10, 1)); }) ==
          ErrorCode::ZeroInitialCondition);
    // one delay already makes the first augmented column nonzero
    CHECK(dmd_projected(x, 2, sampling_operator(200, 10, 1)).rank == 4);
}

TEST_CASE("fixed rank is clamped to the numerical rank") {
    const Matrix x = random_matrix(6, 1, 1) * random_matrix(1, 10, 2);
    const auto m = dmd_tdc(SnapshotMatrix(x, 1.0), 1, RankPolicy::fixed(4));
    CHECK(m.rank == 1);
    CHECK_FALSE(m.warnings.empty());
}

TEST_CASE("pod modes") {
    const Vector u = Vector::LinSpaced(8, -1.0, 2.0).normalized();
    const Vector v = Vector::LinSpaced(5, 1.0, 3.0).normalized();
    const Matrix x = 3.0 * u * v.transpose();
    const Matrix pod = pod_modes(SnapshotMatrix(x, 1.0));
    REQUIRE(pod.cols() == 1);
    CHECK((pod.col(0) - u).norm() < 1e-12);  // u's largest entry is positive
    CHECK(error_code_of([&] { pod_modes(SnapshotMatrix(x.leftCols(1), 1.0)); }) == ErrorCode::InsufficientSnapshots);

    const Matrix r = pod_modes(SnapshotMatrix(random_matrix(20, 6, 3), 1.0));
    CHECK((r.transpose() * r - Matrix::Identity(6, 6)).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("pod modes mix the two signal patterns") {
    const auto x = generate_signal(SignalParams{}, 1);
    const Matrix pod = pod_modes(x);
    REQUIRE(pod.cols() == 2);
    const auto& g = *x.grid();
    Vector v1(g.size()), v2(g.size());
    for (Eigen::Index iy = 0; iy < g.ny; ++iy)
        for (Eigen::Index ix = 0; ix < g.nx; ++ix) {
            v1(iy * g.nx + ix) = signal_mode_v1(g.x(ix), g.y(iy));
            v2(iy * g.nx + ix) = signal_mode_v2(g.x(ix), g.y(iy));
        }
    v1.normalize();
    v2.normalize();
    for (Eigen::Index k = 0; k < 2; ++k) {
        CHECK(std::abs(pod.col(k).dot(v1)) > 0.05);
        CHECK(std::abs(pod.col(k).dot(v2)) > 0.05);
    }
}

TEST_CASE("spectrum classification and exponents") {
    DmdModel m;
    m.dt = 0.05;
    m.eigenvalues.resize(3);
    m.eigenvalues << Complex(1.0, 0.0), std::polar(1.0, 0.4), Complex(1.1, 0.0);
    m.exponents.resize(3);
    for (Eigen::Index k = 0; k < 3; ++k) m.exponents(k) = std::log(m.eigenvalues(k)) / m.dt;
    m.amplitudes = ComplexVector::Ones(3);
    m.rank = 3;
    const auto s = spectrum(m);
    REQUIRE(s.size() == 3);
    CHECK(s[0].mu == Complex(1.1, 0.0));
    CHECK(s[0].circle == CirclePosition::Outside);
    CHECK(s[1].circle == CirclePosition::On);
    CHECK(std::abs(s[1].omega - Complex(0.0, 8.0)) < 1e-12);
    CHECK(s[2].omega == Complex(0.0, 0.0));
    CHECK(s[2].circle == CirclePosition::On);

    CHECK(classify(Complex(0.5, 0.0)) == CirclePosition::Inside);
    CHECK(classify(Complex(1.0 + 5e-7, 0.0)) == CirclePosition::On);
    CHECK(classify(Complex(1.0 + 2e-6, 0.0)) == CirclePosition::Outside);
    for (auto c : {CirclePosition::Inside, CirclePosition::On, CirclePosition::Outside})
        CHECK(circle_position_from_string(to_string(c)) == c);
}

TEST_CASE("real data gives conjugation-closed spectra") {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const auto x = SnapshotMatrix(random_matrix(12, 30, seed), 0.1);
        for (Eigen::Index q : {1, 3}) {
            const auto m = dmd_tdc(x, q);
            CHECK(conjugate_closure_defect(m.eigenvalues) < 1e-8);
        }
    }
    ComplexVector mu(3);
    mu << Complex(0.5, 0.2), Complex(0.5, -0.2), Complex(0.3, 0.0);
    const auto pairs = conjugate_pairs(mu);
    CHECK(pairs[0] == 1);
    CHECK(pairs[1] == 0);
    CHECK(pairs[2] == 2);
    CHECK(conjugate_closure_defect(mu) == 0.0);
    mu(1) = Complex(0.5, -0.1);
    CHECK(conjugate_closure_defect(mu) == doctest::Approx(0.1));
}

TEST_CASE("model serialization round trip") {
    testutil::TempDir dir("model");
    const auto x = simulate(random_stable(4, 2), Vector::Ones(4), 12, 0.2);
    auto m = dmd_projected(x, 2, gaussian_operator(8, 6, 1));
    save_model(m, dir / "m.json", dir / "modes.csv");
    const auto back = load_model(dir / "m.json");
    CHECK(back.eigenvalues == m.eigenvalues);
    CHECK(back.exponents == m.exponents);
    CHECK(back.amplitudes == m.amplitudes);
    CHECK(back.modes == m.modes);
    CHECK(back.tag() == m.tag());
    CHECK(back.q == 2);
    CHECK(back.base_m == 4);
    CHECK(back.measurements == 6);
    CHECK(back.dt == m.dt);
    CHECK((predict(back, 5) - predict(m, 5)).norm() == 0.0);

    save_model(m, dir / "bare.json");
    const auto bare = load_model(dir / "bare.json");
    CHECK(bare.modes.size() == 0);
    CHECK(spectrum(bare) == spectrum(m));
    CHECK(error_code_of([&] { predict(bare, 0); }) == ErrorCode::Shape);
}
