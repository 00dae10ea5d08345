#include "doctest.h"

#include <cmath>

#include <boost/multiprecision/cpp_bin_float.hpp>

#include "nessqfi/errors.hpp"
#include "nessqfi/transfer.hpp"

using namespace nessqfi;

namespace {

ChainParams chain(int n, double delta, double lambda, double mu, double j = 1.0) {
    ChainParams p;
    p.n = n;
    p.delta = delta;
    p.lambda = lambda;
    p.mu = mu;
    p.j_coupling = j;
    return p;
}

Eigen::VectorXd unit(int size, int index) {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(size);
    v(index) = 1.0;
    return v;
}

// Σ_k ⟨L|T^{k−1} D T^{n−k}|R⟩ by explicit dense powers.
double naive_defect(int n, double eta, int d) {
    const TransferSystem ts = build_transfer(d, Complex{eta, 0.0});
    const Eigen::MatrixXd t = ts.dense_t(), dv = ts.dense_vertex();
    const int size = d + 2;
    std::vector<Eigen::VectorXd> left(n), right(n);
    left[0] = unit(size, 0);
    right[0] = unit(size, 1);
    for (int k = 1; k < n; ++k) {
        left[k] = t.transpose() * left[k - 1];
        right[k] = t * right[k - 1];
    }
    double sum = 0.0;
    for (int k = 1; k <= n; ++k) sum += left[k - 1].dot(dv * right[n - k]);
    return sum;
}

// log10 ⟨L|T^n|R⟩ by plain propagation in a float with an unbounded exponent.
double wide_log10_bracket(int n, double delta) {
    using Wide = boost::multiprecision::cpp_bin_float_50;
    const Eigen::MatrixXd t = build_transfer(full_truncation(n), eta_from_delta(delta)).dense_t();
    const Eigen::Index size = t.rows();
    std::vector<Wide> v(size, Wide{0}), w(size);
    v[1] = 1;
    for (int m = 0; m < n; ++m) {
        for (Eigen::Index i = 0; i < size; ++i) {
            Wide acc = 0;
            for (Eigen::Index j = 0; j < size; ++j)
                if (t(i, j) != 0.0) acc += Wide{t(i, j)} * v[j];
            w[i] = acc;
        }
        std::swap(v, w);
    }
    return static_cast<double>(boost::multiprecision::log10(v[0]));
}

} // namespace

TEST_CASE("transfer matrix layout") {
    const TransferSystem ts = build_transfer(4, eta_from_delta(0.3));
    const Eigen::MatrixXd t = ts.dense_t();
    CHECK(t(2, 1) == 0.5);
    CHECK(t(0, 2) == 0.5);
    CHECK(t(0, 0) == 1.0);
    CHECK(t(1, 1) == 1.0);
    const Eigen::MatrixXd flat = build_transfer(5, Complex{}).dense_t();
    CHECK(flat.bottomRightCorner(5, 5).isApprox(Eigen::MatrixXd::Identity(5, 5)));
    // vertex weight k²/2 on the first level, positive in both phases
    CHECK(ts.dense_vertex()(2, 2) == doctest::Approx(0.5));
    CHECK(build_transfer(4, eta_from_delta(2.0)).dense_vertex()(2, 2) == doctest::Approx(0.5));
}

TEST_CASE("bracket small cases") {
    for (double delta : {-2.0, 0.0, 0.4, 1.0, 3.0})
        CHECK(bracket_LTnR(2, eta_from_delta(delta), 1).to_double() == doctest::Approx(0.25));
    CHECK(bracket_LTnR(4, Complex{}, 2).to_double() == 1.5);
    CHECK(bracket_LTnR(6, Complex{}, 3).to_double() == 3.75);
    CHECK(bracket_LTnR(4, eta_from_delta(0.5), 2).to_double() == doctest::Approx(0.92578125).epsilon(1e-15));
}

TEST_CASE("defect sum against explicit powers") {
    // At n = 2 both steps touch a boundary vector, so no bulk vertex is visited.
    CHECK(sum_defect(2, eta_from_delta(0.3), 1).to_double() == 0.0);
    CHECK(naive_defect(2, std::acos(0.3), 1) == doctest::Approx(0.0));
    CHECK(sum_defect(4, eta_from_delta(0.5), 2).to_double() == doctest::Approx(0.4296875).epsilon(1e-15));
    for (double delta : {0.0, 0.3, 0.8})
        for (int n : {3, 10, 25, 50})
            for (int d : {1, 4, 10}) {
                const double eta = std::acos(delta);
                const double naive = naive_defect(n, eta, d);
                CHECK(sum_defect(n, Complex{eta, 0.0}, d).to_double() == doctest::Approx(naive).epsilon(1e-12));
            }
}

TEST_CASE("second eta derivative") {
    CHECK(bracket_second_derivative(4, eta_from_delta(0.5), 2).to_double() ==
          doctest::Approx(0.578125).epsilon(1e-14));
    for (double eta : {0.4, 1.1, 2.0})
        for (int n : {5, 12, 30}) {
            const int d = full_truncation(n);
            const double h = 1e-3;
            auto b = [&](double e) { return bracket_LTnR(n, Complex{e, 0.0}, d).to_double(); };
            auto fd_at = [&](double s) { return (b(eta + s) - 2.0 * b(eta) + b(eta - s)) / (s * s); };
            const double fd = (4.0 * fd_at(h / 2.0) - fd_at(h)) / 3.0;
            CHECK(bracket_second_derivative(n, Complex{eta, 0.0}, d).to_double() ==
                  doctest::Approx(fd).epsilon(1e-5));
        }
}

TEST_CASE("sweep records match single evaluations") {
    const auto pts = leading_order_sweep(20, eta_from_delta(0.7), 10);
    REQUIRE(pts.size() == 20);
    CHECK(pts[19].bracket.to_double() == doctest::Approx(bracket_LTnR(20, eta_from_delta(0.7), 10).to_double()));
    CHECK(pts[19].defect_sum.to_double() == doctest::Approx(sum_defect(20, eta_from_delta(0.7), 10).to_double()));
}

TEST_CASE("rescaled and plain propagation agree") {
    // Plain propagation overflows beyond n ~ 35 at this anisotropy.
    for (int n : {10, 20, 30}) {
        const LogReal a = bracket_LTnR(n, eta_from_delta(2.0), full_truncation(n), LogMode::on);
        const LogReal b = bracket_LTnR(n, eta_from_delta(2.0), full_truncation(n), LogMode::off);
        CHECK(relative_difference(a, b) < 1e-12);
    }
    for (int n : {50, 120})
        CHECK(relative_difference(bracket_LTnR(n, eta_from_delta(2.0), full_truncation(n), LogMode::on),
                                  bracket_LTnR(n, eta_from_delta(2.0), full_truncation(n))) < 1e-12);
    for (int n : {50, 90})
        CHECK(bracket_LTnR(n, eta_from_delta(2.0), full_truncation(n)).log10_abs() ==
              doctest::Approx(wide_log10_bracket(n, 2.0)).epsilon(1e-12));
    const LogReal huge = bracket_LTnR(400, eta_from_delta(2.0), 200);
    CHECK_FALSE(huge.representable());
    CHECK(huge.sign == 1);
    CHECK(std::isfinite(huge.log_abs));
}

TEST_CASE("rational truncation is exact") {
    const Complex eta{M_PI / 3.0, 0.0};
    for (int n : {10, 40, 90})
        CHECK(bracket_LTnR(n, eta, 2).to_double() ==
              doctest::Approx(bracket_LTnR(n, eta, full_truncation(n)).to_double()).epsilon(1e-12));
}

TEST_CASE("leading-order Fisher prefactors") {
    CHECK(f0_x(chain(2, 0.4, 0.1, 1.0), Parameter::lambda).linear() == doctest::Approx(0.125));
    CHECK(f0_x(chain(5, 0.4, 0.1, 0.0), Parameter::mu).linear() > 0.0);
    const double j1 = f0_x(chain(6, 0.4, 0.1, 0.5, 1.0), Parameter::J).linear();
    const double j2 = f0_x(chain(6, 0.4, 0.1, 0.5, 2.0), Parameter::J).linear();
    CHECK(j2 / j1 == doctest::Approx(1.0 / 16.0));
    CHECK_THROWS_AS(f0_x(chain(4, 0.4, 0.1, 1.0), Parameter::delta), PreconditionError);
}

TEST_CASE("leading-order anisotropy Fisher") {
    CHECK(f0_delta_unit(4, 0.5).to_double() == doctest::Approx(0.3828125).epsilon(1e-14));
    CHECK(f0_delta_unit(3, 2.0).to_double() == doctest::Approx(0.125).epsilon(1e-13));
    CHECK(f0_delta_unit(4, 2.0).to_double() == doctest::Approx(17.375).epsilon(1e-13));
    CHECK(f0_delta_unit(5, 2.0).to_double() == doctest::Approx(2201.75).epsilon(1e-13));
    const ChainParams p = chain(4, 0.5, 1e-3, 0.8);
    CHECK(f0_delta(p).linear() == doctest::Approx(0.3828125 * 0.64e-6).epsilon(1e-13));
    for (double delta : {-0.9, -0.2, 0.3, 0.95, 1.5, 3.0})
        for (int n = 3; n <= 12; ++n) CHECK(f0_delta(chain(n, delta, 1e-2, 1.0)).value.sign == 1);
    for (int n : {4, 8, 12}) {
        const ChainParams near = chain(n, 1.0 - 1e-8, 1.0, 1.0);
        CHECK(f0_delta(near).linear() == doctest::Approx(isotropic_f_delta(chain(n, 1.0, 1.0, 1.0))).epsilon(1e-3));
    }
    CHECK_THROWS_AS(f0_delta_unit(4, 1.0), PreconditionError);
}

TEST_CASE("isotropic expansions") {
    CHECK(isotropic_bracket_series(4, 0.0) == 1.5);
    CHECK(isotropic_bracket_series(6, 0.01) ==
          doctest::Approx(bracket_LTnR(6, Complex{0.01, 0.0}, 3).to_double()).epsilon(1e-8));
    CHECK(isotropic_f_delta(chain(4, 1.0, 1.0, 1.0)) == doctest::Approx(1.25));
    CHECK(isotropic_f_delta(chain(3, 1.0, 1.0, 1.0)) == doctest::Approx(0.125));
    CHECK_THROWS_AS(isotropic_bracket_series(300, 0.001), PreconditionError);
}

TEST_CASE("Jordan decomposition") {
    for (double delta : {0.3, 0.7})
        for (int d : {1, 5, 12, 30}) {
            const TransferSystem ts = build_transfer(d, eta_from_delta(delta));
            const JordanData jd = jordan_decompose(ts);
            const Eigen::MatrixXd t = ts.dense_t();
            const Eigen::MatrixXd tj = jd.jordan_form();
            CHECK((jd.v_inv * t * jd.v - tj).norm() < 1e-8);
            CHECK(jd.taus.cwiseAbs().maxCoeff() < 1.0);
            Eigen::MatrixXd tk = Eigen::MatrixXd::Identity(d + 2, d + 2), jk = tk;
            for (int k = 1; k <= 20; ++k) {
                tk = tk * t;
                jk = jk * tj;
                if (k == 1 || k == 5 || k == 20) CHECK((jd.v * jk * jd.v_inv - tk).norm() < 1e-8 * tk.norm());
            }
        }
    const JordanData xx = jordan_decompose(build_transfer(1, eta_from_delta(0.0)));
    CHECK(std::fabs(xx.taus(0)) < 1e-15);
}

TEST_CASE("defective vector") {
    for (int d = 1; d <= 20; ++d) {
        const TransferSystem ts = build_transfer(d, eta_from_delta(0.4));
        const Eigen::VectorXd psi = defective_vector(ts);
        Eigen::VectorXd full = Eigen::VectorXd::Zero(d + 2);
        full.tail(d + 1) = psi;
        const Eigen::VectorXd res = ts.dense_t() * full - full - unit(d + 2, 0);
        CHECK(res.norm() < 1e-10);
        CHECK(psi(1) == doctest::Approx(2.0));
        CHECK((defective_vector_continued_fraction(ts) - psi).norm() < 1e-10 * psi.norm());
    }
    CHECK(defective_vector(build_transfer(1, eta_from_delta(0.0)))(0) == doctest::Approx(4.0));
}

TEST_CASE("continued fractions") {
    CHECK(continued_fraction_C(0) == Rational(1));
    CHECK(continued_fraction_C(1) == Rational(3, 4));
    CHECK(continued_fraction_C(2) == Rational(2, 3));
    for (int k = 0; k <= 60; ++k) {
        CHECK(continued_fraction_C_recurrence(k) == continued_fraction_C(k));
        CHECK(continued_fraction_C_convergent(k) == continued_fraction_C(k));
    }
}

TEST_CASE("chi coefficient") {
    CHECK(chi_coefficient(std::cos(M_PI / 2.0), RationalEta{2, 1}).chi == doctest::Approx(0.25));
    CHECK(chi_coefficient(RationalEta{3, 1}.delta(), RationalEta{3, 1}).chi == doctest::Approx(4.0 / 9.0));
    for (auto r : {RationalEta{2, 1}, RationalEta{3, 1}}) {
        std::vector<double> ns, bs;
        for (int n = 100; n <= 200; ++n) {
            ns.push_back(n);
            bs.push_back(bracket_LTnR(n, Complex{r.eta(), 0.0}, full_truncation(n)).to_double());
        }
        const LinearFit fit = fit_line(ns, bs);
        const auto c = chi_coefficient(r.delta(), r);
        CHECK(fit.slope == doctest::Approx(c.chi).epsilon(1e-6));
        CHECK(fit.intercept == doctest::Approx(c.chi1).epsilon(1e-6));
    }
    const auto irr = chi_coefficient(0.3, std::nullopt, 50);
    CHECK(irr.chi * (1.0 - 0.09) == doctest::Approx(50.0 / 102.0));
    CHECK_THROWS_AS(chi_coefficient(0.3, RationalEta{3, 1}), PreconditionError);
    CHECK_THROWS_AS(chi_coefficient(1.2, std::nullopt), PreconditionError);
}

TEST_CASE("xi coefficient") {
    const XiResult j = xi_rational(RationalEta{3, 1}, XiMethod::jordan);
    const XiResult s = xi_rational(RationalEta{3, 1}, XiMethod::slope);
    CHECK(j.xi == doctest::Approx(1.2633744855967).epsilon(1e-12));
    CHECK(s.xi == doctest::Approx(j.xi).epsilon(1e-9));
    CHECK(s.fit_r2 > 1.0 - 1e-9);
    CHECK(xi_rational(RationalEta{2, 1}, XiMethod::jordan).xi == doctest::Approx(0.1875));
    const auto scan = xi_irrational_scan(0.1, {50, 100});
    CHECK(scan[1].xi == doctest::Approx(xi_irrational(0.1, 100).xi).epsilon(1e-14));
    CHECK(xi_coefficient(RationalEta{3, 1}.delta(), 200, RationalEta{3, 1}, XiMethod::jordan).xi ==
          doctest::Approx(j.xi));
}

TEST_CASE("easy-axis bounds") {
    for (int n = 4; n <= 30; n += 2) {
        const EasyAxisBound b = easy_axis_lower_bound(n, 2.0);
        const LogReal full = bracket_LTnR(n, eta_from_delta(2.0), full_truncation(n));
        CHECK(b.factorial_bound.log_abs <= b.single_path.log_abs + 1e-12);
        CHECK(b.single_path.log_abs <= full.log_abs + 1e-12);
    }
    CHECK_THROWS_AS(easy_axis_lower_bound(5, 2.0), PreconditionError);
    CHECK_THROWS_AS(easy_axis_lower_bound(6, 0.5), PreconditionError);
}

TEST_CASE("Toeplitz spectrum") {
    CHECK(toeplitz_eigs_check(1)[0] == doctest::Approx(1.0));
    const auto two = toeplitz_eigs_check(2);
    CHECK(two[0] == doctest::Approx(0.5));
    CHECK(two[1] == doctest::Approx(1.5));
    const auto num = toeplitz_eigs_check(50), ana = toeplitz_eigs_analytic(50);
    for (int j = 0; j < 50; ++j) CHECK(std::fabs(num[j] - ana[j]) < 1e-12);
}

TEST_CASE("line fit") {
    const LinearFit f = fit_line({1, 2, 3, 4}, {3, 5, 7, 9});
    CHECK(f.slope == doctest::Approx(2.0));
    CHECK(f.intercept == doctest::Approx(1.0));
    CHECK(f.r2 == doctest::Approx(1.0));
}
