#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "tcsim/specfun.hpp"

using namespace tcsim;
using std::numbers::pi;

TEST_CASE("complete elliptic K") {
  CHECK(complete_elliptic_k(0.0) == doctest::Approx(pi / 2).epsilon(1e-15));
  CHECK(std::abs(complete_elliptic_k(0.5) - oracle::elliptic_k(0.5)) < 1e-12);
  for (int i = 1; i <= 9; ++i) {
    const double k = 0.1 * i;
    CHECK(std::abs(complete_elliptic_k(k) - oracle::elliptic_k(k)) < 1e-12);
    CHECK(std::abs(complete_elliptic_k(k) - std::comp_ellint_1(k)) < 1e-12);
  }
  const double k = 0.9999;
  const double asym = std::log(4 / std::sqrt(1 - k * k));
  CHECK(std::abs(complete_elliptic_k(k) / asym - 1) < 0.01);
  double prev = 0;
  for (double kk = 0; kk < 0.999; kk += 0.01) {
    const double v = complete_elliptic_k(kk);
    CHECK(v > prev);
    prev = v;
  }
  CHECK_THROWS_AS(complete_elliptic_k(1.0), Error);
  CHECK_THROWS_AS(complete_elliptic_k(-0.1), Error);
}

TEST_CASE("Jacobi elliptic functions") {
  SUBCASE("degenerate limits") {
    for (double u : {-3.0, -0.4, 0.0, 0.7, 2.5, 10.0}) {
      const auto c = jacobi_elliptic(u, 0.0);
      CHECK(c.sn == doctest::Approx(std::sin(u)).epsilon(1e-14));
      CHECK(c.cn == doctest::Approx(std::cos(u)).epsilon(1e-14));
      CHECK(c.dn == 1.0);
      const auto h = jacobi_elliptic(u, 1.0);
      CHECK(std::abs(h.sn - std::tanh(u)) < 1e-15);
      CHECK(std::abs(h.cn - 1 / std::cosh(u)) < 1e-15);
      CHECK(std::abs(h.dn - 1 / std::cosh(u)) < 1e-15);
    }
  }
  SUBCASE("quarter period") {
    const double k = 0.7, K = oracle::elliptic_k(k);
    const auto e = jacobi_elliptic(K, k);
    CHECK(std::abs(e.sn - 1) < 1e-12);
    CHECK(std::abs(e.cn) < 1e-7);  // cn vanishes linearly; K carries ~1e-15 error
    CHECK(std::abs(e.dn - std::sqrt(1 - 0.49)) < 1e-12);
  }
  SUBCASE("identities, periodicity and the Boost oracle") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> U(-20, 20), Kd(0, 1);
    for (int i = 0; i < 2000; ++i) {
      const double u = U(rng), k = i < 10 ? (i < 5 ? 0.0 : 1.0) : Kd(rng);
      const auto e = jacobi_elliptic(u, k);
      CHECK(std::abs(e.sn * e.sn + e.cn * e.cn - 1) < 1e-12);
      CHECK(std::abs(e.dn * e.dn + k * k * e.sn * e.sn - 1) < 1e-12);
      CHECK(std::abs(e.sn) <= 1 + 1e-15);
      CHECK(std::abs(e.cn) <= 1 + 1e-15);
      CHECK(e.dn <= 1 + 1e-15);
      if (k < 1) {
        const auto o = oracle::jacobi(u, k);
        CHECK(std::abs(e.sn - o.sn) < 1e-10);
        CHECK(std::abs(e.cn - o.cn) < 1e-10);
        CHECK(std::abs(e.dn - o.dn) < 1e-10);
        if (k < 0.999) {
          const auto p = jacobi_elliptic(u + 4 * complete_elliptic_k(k), k);
          CHECK(std::abs(p.sn - e.sn) < 1e-9);
          CHECK(std::abs(p.cn - e.cn) < 1e-9);
          CHECK(std::abs(p.dn - e.dn) < 1e-9);
        }
      }
    }
  }
  CHECK_THROWS_AS(jacobi_elliptic(0.3, 1.2), Error);
  CHECK_THROWS_AS(jacobi_elliptic(0.3, -0.1), Error);
}

TEST_CASE("depressed cubic") {
  SUBCASE("degenerate switching relations") {
    for (double A2 : {-0.5, -1.0 / 6, -2.0 / 3}) {
      const auto r = std::get<RealCubicRoots<double>>(depressed_cubic_roots(3 * A2 * A2, -A2 * A2 * A2));
      CHECK(r.e1 == doctest::Approx(-A2).epsilon(1e-12));
      CHECK(r.e2 == doctest::Approx(A2 / 2).epsilon(1e-6));
      CHECK(r.e3 == doctest::Approx(A2 / 2).epsilon(1e-6));
    }
  }
  SUBCASE("zero") {
    const auto r = std::get<RealCubicRoots<double>>(depressed_cubic_roots(0.0, 0.0));
    CHECK(r.e1 == 0);
    CHECK(r.e2 == 0);
    CHECK(r.e3 == 0);
  }
  SUBCASE("random substitution") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> U(-50, 50);
    int complex_cases = 0;
    for (int i = 0; i < 5000; ++i) {
      const double g2 = U(rng), g3 = U(rng);
      const double scale = std::max({1.0, std::abs(g2), std::abs(g3)});
      auto f = [&](auto x) { return 4.0 * x * x * x - g2 * x - g3; };
      const auto roots = depressed_cubic_roots(g2, g3);
      if (const auto* r = std::get_if<RealCubicRoots<double>>(&roots)) {
        CHECK(r->e1 >= r->e2);
        CHECK(r->e2 >= r->e3);
        CHECK(std::abs(r->e1 + r->e2 + r->e3) < 1e-10 * scale);
        for (double e : {r->e1, r->e2, r->e3}) CHECK(std::abs(f(e)) < 1e-10 * scale);
      } else {
        ++complex_cases;
        const auto& c = std::get<ComplexCubicRoots<double>>(roots);
        CHECK(g2 * g2 * g2 - 27 * g3 * g3 < 0);
        CHECK(std::abs(f(c.real_root)) < 1e-10 * scale);
        CHECK(std::abs(f(c.upper)) < 1e-10 * scale);
        CHECK(std::abs(c.real_root + 2 * c.upper.real()) < 1e-10 * scale);
      }
    }
    CHECK(complex_cases > 0);
  }
}

namespace {

// five-point central difference; the step follows z so the stencil stays clear of the pole
double p_prime(double z, const WeierstrassCoeffs<double>& w) {
  const double h = 1e-3 * std::abs(z);
  auto P = [&](double s) { return weierstrass_p(s, w); };
  return (P(z - 2 * h) - 8 * P(z - h) + 8 * P(z + h) - P(z + 2 * h)) / (12 * h);
}

}  // namespace

TEST_CASE("Weierstrass P") {
  SUBCASE("degenerate trigonometric form") {
    const double A2 = -2.0 / 3;
    const auto w = make_weierstrass_coeffs(3 * A2 * A2, -A2 * A2 * A2);
    const double e1 = -A2;
    for (double z : {0.1, 0.5, 1.0, 1.7}) {
      const double t = std::tan(std::sqrt(1.5 * e1) * z);
      CHECK(weierstrass_p(z, w) == doctest::Approx(e1 + 1.5 * e1 / (t * t)).epsilon(1e-12));
    }
  }
  SUBCASE("Laurent leading term") {
    for (auto [g2, g3] : {std::pair{2.0, 0.5}, {7.0, -1.0}, {1.0, 3.0}}) {
      const auto w = make_weierstrass_coeffs(g2, g3);
      const double z = 1e-4;
      CHECK(std::abs(weierstrass_p(z, w) * z * z - 1) < 1e-6);
      // two more Laurent terms as an independent check at moderate z
      const double z2 = 0.05;
      const double laurent = 1 / (z2 * z2) + g2 * std::pow(z2, 2) / 20 + g3 * std::pow(z2, 4) / 28;
      CHECK(std::abs(weierstrass_p(z2, w) - laurent) < 1e-8);
    }
  }
  SUBCASE("defining differential equation") {
    for (auto [g2, g3] : {std::pair{7.0, -1.0}, {4.0, 0.5}, {12.0, 3.0}, {1.0, 3.0}, {0.5, -2.0}}) {
      const auto w = make_weierstrass_coeffs(g2, g3);
      for (double z = 0.05; z < 1.0; z += 0.0731) {
        const double P = weierstrass_p(z, w), dP = p_prime(z, w);
        const double rhs = 4 * P * P * P - g2 * P - g3;
        CHECK(std::abs(dP * dP - rhs) < 1e-8 * std::max(1.0, std::abs(rhs)));
      }
    }
  }
  SUBCASE("shooting oracle: P'' = 6 P^2 - g2/2") {
    const double g2 = 7.0, g3 = -1.0;
    const auto w = make_weierstrass_coeffs(g2, g3);
    const double z0 = 0.3;
    const double p0 = weierstrass_p(z0, w);
    // the initial slope is the negative root of P'^2 = 4P^3 - g2 P - g3 (P decreases away from the pole)
    const double dp0 = -std::sqrt(4 * p0 * p0 * p0 - g2 * p0 - g3);
    std::vector<double> ts;
    for (double z = z0; z < 0.9; z += 0.05) ts.push_back(z);
    auto sol = oracle::odeint_samples<std::vector<double>>(
        [&](double, const std::vector<double>& y) { return std::vector<double>{y[1], 6 * y[0] * y[0] - g2 / 2}; },
        std::vector<double>{p0, dp0}, ts, 1e-13);
    for (std::size_t i = 0; i < ts.size(); ++i) CHECK(std::abs(sol[i][0] - weierstrass_p(ts[i], w)) < 1e-8);
    CHECK(std::abs(dp0 - p_prime(z0, w)) < 1e-8 * std::abs(dp0));
  }
  SUBCASE("pole") {
    const auto w = make_weierstrass_coeffs(1.0, 0.0);
    CHECK_THROWS_AS(weierstrass_p(0.0, w), Error);
    CHECK_THROWS_AS(weierstrass_p(1e-10, w), Error);
    CHECK_NOTHROW(weierstrass_p(1e-10, w, 1e-12));
  }
}

TEST_CASE("cosine integral") {
  CHECK(cosine_integral(1.0) == doctest::Approx(0.3374039229009681).epsilon(1e-13));
  for (double x : {0.01, 0.3, 1.0, 1.99, 2.01, 3.0, 7.5, 12.0, 19.9, 20.0, 20.1, 35.0}) {
    CHECK(std::abs(cosine_integral(x) - oracle::cosine_integral(x)) < 1e-12);
  }
  CHECK(std::abs(cosine_integral(50.0)) < 0.02);
  const double x = 1e-6;
  CHECK(std::abs(cosine_integral(x) - std::log(x) - std::numbers::egamma) < 1e-10);
  CHECK_THROWS_AS(cosine_integral(0.0), Error);
  CHECK_THROWS_AS(cosine_integral(-1.0), Error);
}

TEST_CASE("error function") {
  CHECK(error_function(0.0) == 0.0);
  CHECK(std::abs(error_function(6.0) - 1) < 1e-15);
  CHECK(error_function(1.0) == doctest::Approx(0.8427007929497149).epsilon(1e-14));
  for (double x = -3; x <= 3; x += 0.137) {
    CHECK(std::abs(error_function(x) - oracle::erf_series(x)) < 1e-12);
    CHECK(std::abs(error_function(x) + error_function(-x)) < 1e-16);
    CHECK(std::abs(error_function(x) - boost::math::erf(x)) < 1e-15);
  }
}
