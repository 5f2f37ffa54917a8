#include <doctest.h>

#include <cmath>

#include <json.hpp>

#include "anchorda/error.hpp"
#include "anchorda/model_selection.hpp"
#include "anchorda/scm_sim.hpp"
#include "support.hpp"

using namespace anchorda;

namespace {

SCMConfig reference_config() {
  return SCMConfig::from_key_values(KeyValues::read(ANCHORDA_TEST_DATA "/reference_confounded.cfg"));
}

SCMConfig noise_free() {
  SCMConfig cfg;
  cfg.sigma_int = 0.0;
  cfg.bias_range = 0.0;
  cfg.confounding = 0.0;
  return cfg;
}

ErrorKind kind_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an anchorda::Error");
  return ErrorKind::numerical;
}

}  // namespace

TEST_CASE("shape and labels of the default simulation") {
  const SCMConfig cfg;
  const auto sim = simulate(cfg, 1);
  CHECK(sim.data.rows() == cfg.runs() * 231);
  CHECK(sim.data.x.cols() == 128);
  CHECK(sim.data.x.distinct_models() == std::vector<std::string>{"M01", "M02", "M03"});
  CHECK(sim.data.y.name() == "anthropogenic");
  REQUIRE(sim.data.anchors);
  CHECK(sim.data.anchors->names() == std::vector<std::string>{"volcanic"});
  CHECK(same_values(sim.data.anchors->values().col(0), sim.forcings.col(1)));
  CHECK(same_values(sim.data.y.values(), sim.forcings.col(2)));
  for (std::size_t i = 0; i < sim.data.rows(); ++i) {
    const bool control = sim.data.x.scenarios()[i] == "control";
    const bool before_ramp = sim.data.x.years()[i] < 1870 + cfg.ramp_start_index;
    if (control || before_ramp) CHECK(sim.forcings(static_cast<Eigen::Index>(i), 2) == 0.0);
  }
  // F3 reaches ramp_max in the last forced year.
  CHECK(sim.forcings(2 * 231 - 1, 2) == doctest::Approx(cfg.ramp_max));
  // Every run covers the baseline window, so anomalies always exist.
  CHECK_NOTHROW(compute_anomalies(sim.data, cfg.baseline));
}

TEST_CASE("without noise, x minus the forcing response is a fixed per-model field") {
  SCMConfig cfg;
  cfg.confounding = 0.0;
  cfg.sigma_int = 0.0;
  const auto sim = simulate(cfg, 4);
  const Eigen::MatrixXd resid = sim.data.x.values() - sim.forcings * sim.loadings.transpose();
  for (Eigen::Index i = 0; i < resid.rows(); ++i) {
    const Eigen::Index first = (i / (231 * 2)) * (231 * 2);
    CHECK((resid.row(i) - resid.row(first)).cwiseAbs().maxCoeff() < 1e-12);
  }
  // Different models get different fields.
  CHECK((resid.row(0) - resid.row(231 * 2)).cwiseAbs().maxCoeff() > 1e-3);
}

TEST_CASE("noise-free single-factor data is rank one") {
  SCMConfig cfg = noise_free();
  cfg.n_models = 1;
  cfg.scenarios = {"control"};
  cfg.loading_mean = {0.4, 0.0, 0.0};
  const auto sim = simulate(cfg, 7);
  const Eigen::MatrixXd outer = sim.forcings.col(0) * sim.loadings.col(0).transpose();
  CHECK(same_values(sim.data.x.values(), outer));
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(sim.data.x.values());
  CHECK(svd.singularValues()(1) < 1e-12 * svd.singularValues()(0));
}

TEST_CASE("same seed is bit-identical, other seeds and thread counts behave") {
  const SCMConfig cfg;
  const auto a = simulate(cfg, 42);
  const auto b = simulate(cfg, 42);
  const auto c = simulate(cfg, 43);
  const auto d = simulate(cfg, 42, 4);
  CHECK(a.data == b.data);
  CHECK(same_values(a.loadings, b.loadings));
  CHECK_FALSE(a.data == c.data);
  CHECK(a.data == d.data);
  CHECK(same_values(a.forcings, d.forcings));
}

TEST_CASE("noise-free regression recovers the loadings") {
  const auto sim = simulate(noise_free(), 5);
  // Columnwise least squares of x on (F1, F2, F3).
  const Eigen::MatrixXd coef = sim.forcings.colPivHouseholderQr().solve(sim.data.x.values());
  CHECK((coef.transpose() - sim.loadings).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("minimum-norm fit on noise-free data matches the population coefficient") {
  // x = F W^T and y = F e3, so every exact fit solves W^T beta = e3 and the
  // minimum-norm one is W (W^T W)^-1 e3.
  const auto sim = simulate(noise_free(), 6);
  const auto m = fit_ridge(sim.data.x.values(), sim.data.y.values(), 0.0);
  const Eigen::MatrixXd& w = sim.loadings;
  const Eigen::VectorXd expected = w * (w.transpose() * w).ldlt().solve(Eigen::Vector3d(0, 0, 1));
  CHECK(m.min_norm);
  CHECK((m.beta - expected).norm() < 1e-4 * expected.norm());
}

TEST_CASE("spatial noise has the configured marginal scale") {
  SCMConfig cfg;
  cfg.bias_range = 0.0;
  cfg.loading_mean = {0.0, 0.0, 0.0};
  cfg.sigma_int = 0.7;
  cfg.n_models = 4;
  const auto x = simulate(cfg, 3).data.x.values();
  const double sd = std::sqrt(x.array().square().mean());
  CHECK(sd == doctest::Approx(0.7).epsilon(0.03));
}

TEST_CASE("shift interventions") {
  const SCMConfig base;
  CHECK(simulate(shift_intervention(base, Forcing::volcanic, 0.0), 9).data == simulate(base, 9).data);

  // +3 then -3 on F1 composes to the identity.
  const auto there_and_back =
      shift_intervention(shift_intervention(base, Forcing::solar, 3.0), Forcing::solar, -3.0);
  CHECK(simulate(there_and_back, 9).data == simulate(base, 9).data);

  // Shifting F2 by -5 moves its post-onset mean by -5 and leaves the rest alone.
  SCMConfig big = base;
  big.n_models = 25;  // 25 * 2 runs * 180 post-onset years = 9000 draws
  const auto plain = simulate(big, 10);
  const auto shifted = simulate(shift_intervention(big, Forcing::volcanic, -5.0), 10);
  double sum = 0.0, plain_sum = 0.0;
  int count = 0;
  for (std::size_t i = 0; i < plain.data.rows(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    if (plain.data.x.years()[i] >= base.shift_onset_year) {
      sum += shifted.forcings(r, 1);
      plain_sum += plain.forcings(r, 1);
      ++count;
    } else {
      CHECK(shifted.forcings(r, 1) == plain.forcings(r, 1));
    }
  }
  CHECK((sum - plain_sum) / count == doctest::Approx(-5.0).epsilon(1e-12));
  // Against the analytic stationary mean of the unshifted process.
  const double stationary = -base.volcanic_rate * base.volcanic_mean / (1.0 - base.volcanic_decay);
  CHECK(sum / count == doctest::Approx(stationary - 5.0).epsilon(0.02));

  CHECK(kind_of([&] { shift_intervention(base, Forcing::anthropogenic, 1.0); }) == ErrorKind::domain);
  CHECK(shift_intervention(base, Forcing::anthropogenic, 1.0, true).shift[2] == 1.0);
}

TEST_CASE("configuration parsing and validation") {
  const SCMConfig cfg;
  const auto back = SCMConfig::from_key_values(cfg.to_key_values());
  CHECK(back.to_key_values().entries() == cfg.to_key_values().entries());
  CHECK(simulate(back, 2).data == simulate(cfg, 2).data);

  auto kv = cfg.to_key_values();
  kv.set("grid_shape", "0,8");
  CHECK(kind_of([&] { SCMConfig::from_key_values(kv); }) == ErrorKind::config);
  kv = cfg.to_key_values();
  kv.set("unknown_knob", "1");
  CHECK(kind_of([&] { SCMConfig::from_key_values(kv); }) == ErrorKind::config);
  kv = cfg.to_key_values();
  kv.set("anchors", "anthropogenic");
  CHECK(kind_of([&] { SCMConfig::from_key_values(kv); }) == ErrorKind::config);

  SCMConfig bad;
  bad.years = 1;
  CHECK(kind_of([&] { bad.validate(); }) == ErrorKind::config);
  bad = SCMConfig{};
  bad.sigma_int = -1.0;
  CHECK(kind_of([&] { bad.validate(); }) == ErrorKind::config);
  bad = SCMConfig{};
  bad.baseline = {1700, 1800};
  CHECK(kind_of([&] { bad.validate(); }) == ErrorKind::config);

  CHECK(forcing_from_string("F1") == Forcing::solar);
  CHECK(forcing_from_string("2") == Forcing::volcanic);
  CHECK(forcing_from_string("anthropogenic") == Forcing::anthropogenic);
}

TEST_CASE("truth sidecar echoes seed, config and loadings") {
  SCMConfig cfg;
  cfg.grid = {4, 2};
  const auto sim = simulate(cfg, 77);
  const auto j = nlohmann::json::parse(format_truth(sim, cfg));
  CHECK(j["format"] == "anchorda-sim-truth");
  CHECK(j["seed"] == 77);
  CHECK(j["config"]["grid_shape"] == "4,2");
  REQUIRE(j["loadings"]["volcanic"].size() == 8);
  for (int k = 0; k < 8; ++k) CHECK(j["loadings"]["volcanic"][k].get<double>() == sim.loadings(k, 1));
  CHECK(j["model_bias"].size() == 3);
}

TEST_CASE("worst-case risk") {
  const auto cfg = reference_config();
  const std::uint64_t seed = 1;
  const auto ds = compute_anomalies(simulate(cfg, seed).data, cfg.baseline);
  const auto split = split_models(ds.x.model_ids(), 0.75, seed);
  const auto train = ds.take_rows(split.train_rows), test = ds.take_rows(split.test_rows);
  RiskOptions ro;
  ro.eval_models = {split.test_models.begin(), split.test_models.end()};

  FitOptions ols;
  ols.lambda = 1.0;
  const auto m1 = fit_dataset(train, ols);
  FitOptions anc = ols;
  anc.gamma = 16.0;
  const auto m16 = fit_dataset(train, anc);

  SUBCASE("a single zero shift is the test error") {
    const Eigen::VectorXd e = test.y.values() - predict(m1, test.x.values());
    const std::vector<double> zero{0.0};
    const auto curve = worst_case_risk(m1, cfg, zero, seed, ro);
    CHECK(curve.supremum == doctest::Approx(e.squaredNorm() / static_cast<double>(e.size())).epsilon(1e-12));
    CHECK(curve.argmax_delta == 0.0);
  }

  SUBCASE("OLS risk grows with the shift size") {
    for (double sign : {1.0, -1.0}) {
      const std::vector<double> deltas{0.0, 2.0 * sign, 5.0 * sign, 10.0 * sign};
      const auto curve = worst_case_risk(m1, cfg, deltas, seed, ro);
      for (std::size_t i = 1; i < deltas.size(); ++i) CHECK(curve.mse[i] >= curve.mse[i - 1]);
    }
  }

  SUBCASE("anchoring trades in-distribution accuracy for shift robustness") {
    const std::vector<double> deltas{0, 2, -2, 5, -5, 10, -10};
    const auto c1 = worst_case_risk(m1, cfg, deltas, seed, ro);
    const auto c16 = worst_case_risk(m16, cfg, deltas, seed, ro);
    CHECK(c1.mse[0] <= c16.mse[0]);
    CHECK(c16.supremum < c1.supremum);
    CHECK(std::abs(c1.argmax_delta) == 10.0);
  }

  CHECK(kind_of([&] { worst_case_risk(m1, cfg, std::vector<double>{}, seed, ro); }) == ErrorKind::config);
}
