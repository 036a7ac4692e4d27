#include <doctest.h>

#include <cmath>

#include "gelk/error.hpp"
#include "gelk/model_io.hpp"
#include "gelk/spectral.hpp"

using namespace gelk;

TEST_CASE("gelation times of the bundled examples") {
  CHECK(gelation_time(multiplicative_monodisperse().system, multiplicative_monodisperse().measure) == 1.0);
  const Model two = two_atom_multiplicative();
  CHECK(gelation_time(two.system, two.measure) == doctest::Approx(0.4).epsilon(1e-12));
  const Model kac = kac_gaussian(5);
  CHECK(gelation_time(kac.system, kac.measure) == doctest::Approx(1.0 / (3.0 + std::sqrt(15.0))).epsilon(1e-12));
}

TEST_CASE("t_g scales inversely with the rates and the mass") {
  const Model kac = kac_gaussian(5);
  const double t_g = gelation_time(kac.system, kac.measure);
  CHECK(gelation_time(kac.system.scaled(2.0), kac.measure) == doctest::Approx(t_g / 2.0));
  CHECK(gelation_time(kac.system, kac.measure.scaled(3.0)) == doctest::Approx(t_g / 3.0));
}

TEST_CASE("power iteration agrees with the dense eigensolver") {
  const Model kac = kac_gaussian(5);
  const SpectralResult s = analyze_spectrum(kac.system, kac.measure);
  const PowerIterationResult p = spectral_radius(s.lambda_matrix);
  CHECK(p.radius == doctest::Approx(s.radius).epsilon(1e-9));
  CHECK(p.residual < 1e-9);
  CHECK((s.psi.array() > 0).all());
  const Matrix q = (Matrix(2, 2) << 1.0, 3.0, 3.0, 15.0).finished();
  CHECK(s.psi.dot(q * s.psi) == doctest::Approx(1.0));
}

TEST_CASE("r(AQ) equals r(QA)") {
  const Model kac = kac_gaussian(5);
  const Matrix q = gram_matrix(kac.measure);
  const Matrix a = kac.system.a_plus();
  CHECK(spectral_radius(a * q).radius == doctest::Approx(spectral_radius(q * a).radius).epsilon(1e-9));
}

TEST_CASE("mean free time exceeds the gelation time") {
  for (const char* name : {"multiplicative", "two-atom", "kac-gaussian"}) {
    const Model m = builtin_model(name);
    INFO(name);
    CHECK(mean_free_time(m.system, m.measure) >= gelation_time(m.system, m.measure) - 1e-12);
  }
  const Model kac = kac_gaussian(5);
  CHECK(mean_free_time(kac.system, kac.measure) > gelation_time(kac.system, kac.measure));
}

TEST_CASE("singular Gram matrix is reported") {
  const Model kac = kac_from_velocities({{1.0, 0.0, 0.0}, {-1.0, 0.0, 0.0}});
  CHECK_THROWS_AS(analyze_spectrum(kac.system, kac.measure), DegenerateMeasure);
}
