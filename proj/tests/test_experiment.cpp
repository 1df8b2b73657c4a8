#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "geoavg/experiment.hpp"
#include "geoavg/risk.hpp"
#include "test_util.hpp"

using namespace geoavg;
using namespace geoavg::testutil;

TEST_CASE("monte carlo estimate is deterministic and worker independent") {
  VectorXd spectrum(3);
  spectrum << 1.0, 0.5, 0.25;
  const auto instance = make_instance(3, spectrum, VectorXd::Ones(3), 0.4);
  SgdConfig config;
  config.eta = 0.1;
  const auto scheme = AveragingScheme::geometric(0.99);
  const auto a = mc_excess_risk(instance, config, scheme, 300, 40, 99, 1);
  const auto b = mc_excess_risk(instance, config, scheme, 300, 40, 99, 4);
  CHECK(a.mean == b.mean);
  CHECK(a.stderr == b.stderr);
  CHECK(a.reps == 40);
}

TEST_CASE("common random numbers couple the schemes") {
  VectorXd spectrum(3);
  spectrum << 1.0, 0.5, 0.25;
  const auto instance = make_instance(3, spectrum, VectorXd::Ones(3), 0.4);
  SgdConfig config;
  config.eta = 0.1;
  const std::vector<AveragingScheme> schemes{AveragingScheme::geometric(0.97),
                                             AveragingScheme::geometric(0.97),
                                             AveragingScheme::uniform()};
  const auto estimates = mc_excess_risk_multi(instance, config, schemes, 200, 30, 5);
  CHECK(estimates[0].mean == estimates[1].mean);
  CHECK(estimates[0].stderr == estimates[1].stderr);
  CHECK(estimates[0].mean != estimates[2].mean);
}

TEST_CASE("zero noise from the optimum gives exactly zero risk") {
  VectorXd spectrum(2);
  spectrum << 1.0, 0.5;
  VectorXd w_star(2);
  w_star << 2.0, -1.0;
  const auto instance = make_instance(2, spectrum, w_star, 0.0);
  SgdConfig config;
  config.eta = 0.2;
  config.w0 = w_star;
  for (const auto& scheme :
       {AveragingScheme::uniform(), AveragingScheme::geometric(0.9),
        AveragingScheme::tail(25)}) {
    const auto estimate = mc_excess_risk(instance, config, scheme, 100, 10, 1);
    CHECK(estimate.mean == 0.0);
    CHECK(estimate.stderr == 0.0);
  }
}

TEST_CASE("geometric averaging wins on poorly conditioned small samples, tail "
          "averaging wins on well conditioned long runs") {
  SUBCASE("poorly conditioned, small n, low signal-to-noise") {
    const auto instance = make_instance(10, inverse_square_spectrum(10),
                                        VectorXd::Constant(10, 0.05), 1.0);
    const double eta = 0.1;
    const Index n = 50;
    const auto lambda_star = find_lambda_star(instance, eta, n);
    REQUIRE(lambda_star.has_value());
    SgdConfig config;
    config.eta = eta;
    const auto geometric = AveragingScheme::geometric(1.0 - eta * *lambda_star);
    const auto tail = AveragingScheme::tail(n / 2);
    int geometric_wins = 0;
    for (int rep = 0; rep < 100; ++rep) {
      SampleStream stream(instance, derive_seed(11, rep));
      const IterateTrace trace = run(stream, n, config, &instance);
      const double geo_risk = excess_risk(average(trace, geometric), instance);
      const double tail_risk = excess_risk(average(trace, tail), instance);
      if (geo_risk < tail_risk) ++geometric_wins;
    }
    CHECK(geometric_wins >= 70);
  }
  SUBCASE("well conditioned, long run, strong signal") {
    const auto instance =
        make_instance(5, VectorXd::Ones(5), VectorXd::Ones(5), 0.5);
    SgdConfig config;
    config.eta = 0.2;
    const Index n = 2000;
    const auto schemes = std::vector<AveragingScheme>{
        AveragingScheme::tail(n / 2),
        AveragingScheme::geometric(1.0 - 0.2 * 0.25)};
    const auto estimates = mc_excess_risk_multi(instance, config, schemes, n, 50, 7);
    CHECK(estimates[0].mean < estimates[1].mean);
  }
}
