#include <cmath>
#include <numbers>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "json.hpp"

#include "pbsmc/bench_arm.hpp"
#include "pbsmc/errors.hpp"
#include "pbsmc/sim.hpp"
#include "test_util.hpp"

using namespace pbsmc;
using namespace pbsmc::test;

namespace {

Vec v1(double a) { return (Vec(1) << a).finished(); }
Vec v2(double a, double b) { return (Vec(2) << a, b).finished(); }

Scenario scalar_scenario(Potential pot) {
  Scenario s;
  s.name = "scalar";
  s.controller.mode = ControllerMode::PbsmcStabilize;
  s.controller.model = constant_model(Mat::Identity(1, 1), Mat::Zero(1, 1), Mat::Identity(1, 1));
  s.controller.sliding_map = SlidingMap::linear(Mat::Identity(1, 1), Mat::Identity(1, 1));
  s.controller.potential = pot;
  s.q0 = v1(1.0);
  s.p0 = v1(0.0);
  s.t_final = 2.0;
  s.h = 1e-3;
  s.waive_assumptions = true;
  return s;
}

Scenario arm_stabilize(Potential pot, double t_final, double h) {
  Scenario s;
  s.name = "arm";
  s.controller.mode = ControllerMode::PbsmcStabilize;
  s.controller.model = arm_model();
  s.controller.sliding_map = SlidingMap::linear(arm_sliding_gain(), Mat::Identity(2, 2));
  s.controller.potential = pot;
  s.q0 = v2(0.5, -0.3);
  s.p0 = v2(0.2, 0.1);
  s.t_final = t_final;
  s.h = h;
  s.waive_assumptions = true;
  return s;
}

Trace sigma_trace(const std::vector<double>& values, double dt) {
  Trace tr;
  tr.dof = 1;
  for (std::size_t i = 0; i < values.size(); ++i) {
    TraceSample s;
    s.t = dt * static_cast<double>(i);
    s.sigma = v1(values[i]);
    tr.samples.push_back(s);
  }
  return tr;
}

}  // namespace

TEST(Simulate, SampleCountAndTimes) {
  auto s = scalar_scenario(Potential::norm_power(2, 1.3, 2));
  s.record_stride = 7;
  const Trace tr = simulate(s);
  EXPECT_EQ(tr.samples.size(), static_cast<std::size_t>(std::floor(2.0 / (1e-3 * 7))) + 1);
  EXPECT_EQ(tr.stats.steps, 2000u);
  for (std::size_t i = 1; i < tr.samples.size(); ++i) EXPECT_GT(tr.samples[i].t, tr.samples[i - 1].t);
}

TEST(Simulate, Deterministic) {
  const auto s = arm_stabilize(Potential::norm_power(2, 1, 1), 0.5, 1e-4);
  std::ostringstream a, b;
  write_csv(simulate(s), a);
  write_csv(simulate(s), b);
  EXPECT_EQ(a.str(), b.str());
}

TEST(Simulate, ConservativeOpenLoop) {
  Scenario s = arm_stabilize(Potential::norm_power(2, 1, 1), 1.0, 1e-4);
  s.controller.model = undamped(arm_model());
  s.open_loop = true;
  const Trace tr = simulate(s);
  const double h0 = tr.samples.front().H;
  double drift = 0.0;
  for (const auto& smp : tr.samples) drift = std::max(drift, std::abs(smp.H - h0));
  EXPECT_NEAR(h0, hamiltonian0(s.controller.model, s.q0, s.p0), 1e-15);
  EXPECT_LT(drift, 1e-8);
  EXPECT_LT(metrics(tr).max_h_increase, 1e-8);
}

TEST(Simulate, LyapunovNonincreasing) {
  const Trace tr = simulate(arm_stabilize(Potential::norm_power(2, 1.3, 2), 3.0, 1e-4));
  EXPECT_LE(tr.stats.max_relative_h_increase, 1e-7);
  EXPECT_LT(tr.samples.back().H, tr.samples.front().H);
}

TEST(Simulate, IntegratorsAgreeToFirstOrder) {
  auto rk = arm_stabilize(Potential::norm_power(0.5, 2, 2), 1.0, 1e-3);
  auto eu = rk;
  eu.integrator = Integrator::SemiImplicitEuler;
  const Trace ta = simulate(rk), tb = simulate(eu);
  const auto& a = ta.samples.back();
  const auto& b = tb.samples.back();
  const double gap = (a.q - b.q).norm() + (a.p - b.p).norm();
  EXPECT_LT(gap, 10.0 * rk.h);
  EXPECT_GT(gap, 0.0);
}

TEST(Simulate, DivergenceReported) {
  // RK4 on a stiff linear loop far outside its stability region.
  auto s = scalar_scenario(Potential::norm_power(50.0, 2, 2));
  s.h = 1.0;
  s.t_final = 1000.0;
  try {
    simulate(s);
    FAIL() << "expected DivergenceError";
  } catch (const DivergenceError& e) {
    EXPECT_GE(e.last_valid_time(), 0.0);
    EXPECT_LT(e.last_valid_time(), 1000.0);
  }
}

TEST(Simulate, CertificationEnforcedUnlessWaived) {
  auto s = scalar_scenario(Potential::norm_power(2, 1.3, 2));
  s.controller.sliding_map = SlidingMap::linear(-Mat::Identity(1, 1), Mat::Identity(1, 1));
  s.certification = CertificationBox::symmetric(1, 1, 1);
  s.certification_samples = 25;
  s.waive_assumptions = false;
  EXPECT_THROW(simulate(s), AssumptionViolated);
  s.waive_assumptions = true;
  s.t_final = 0.01;
  EXPECT_NO_THROW(simulate(s));
}

TEST(Simulate, InvalidScenario) {
  auto s = scalar_scenario(Potential::norm_power(2, 1.3, 2));
  s.h = 0.0;
  EXPECT_THROW(simulate(s), ParameterError);
  s = scalar_scenario(Potential::norm_power(2, 1.3, 2));
  s.record_stride = 0;
  EXPECT_THROW(validate(s), ParameterError);
  s = scalar_scenario(Potential::norm_power(2, 1.3, 2));
  s.q0 = v2(0, 0);
  EXPECT_THROW(validate(s), ParameterError);
}

TEST(Simulate, DisturbanceBoundChecked) {
  auto s = scalar_scenario(Potential::norm_power(2, 1.3, 2));
  DisturbanceProfile d;
  d.d_m = [](double) { return v1(1.0); };
  d.bound_m = 0.5;
  s.disturbance = d;
  EXPECT_THROW(simulate(s), ParameterError);
}

TEST(Simulate, ScalarReachesSurface) {
  const Trace tr = simulate(scalar_scenario(Potential::norm_power(2, 1, 1)));
  ASSERT_TRUE(tr.sliding_entry.has_value());
  // sigma_dot = -2 * 2 sgn(sigma) from sigma(0) = 1: the surface is hit at t = 1/4.
  EXPECT_NEAR(*tr.sliding_entry, 0.25, 0.02);
}

TEST(DetectSliding, TrivialCases) {
  EXPECT_EQ(detect_sliding(sigma_trace(std::vector<double>(101, 0.0), 0.01), 0.05, 0.5), 0.0);
  EXPECT_FALSE(detect_sliding(sigma_trace(std::vector<double>(101, 1.0), 0.01), 0.05, 0.5));
  EXPECT_FALSE(detect_sliding(sigma_trace(std::vector<double>(11, 0.0), 0.01), 0.05, 0.5));
}

TEST(DetectSliding, RequiresFullDwell) {
  // Blips at t = 0.3 and 0.7 leave gaps shorter than the dwell before t = 0.71.
  std::vector<double> v(201, 0.0);
  v[30] = 1.0;
  v[70] = 1.0;
  const auto t = detect_sliding(sigma_trace(v, 0.01), 0.05, 0.5);
  ASSERT_TRUE(t.has_value());
  EXPECT_NEAR(*t, 0.71, 1e-12);
  v[160] = 1.0;
  v[120] = 1.0;
  EXPECT_FALSE(detect_sliding(sigma_trace(v, 0.01), 0.05, 0.5).has_value());
}

TEST(Metrics, ChannelsAndJson) {
  const Trace tr = simulate(scalar_scenario(Potential::norm_power(2, 1, 1)));
  const Metrics m = metrics(tr);
  EXPECT_EQ(m.steps, 2000u);
  EXPECT_EQ(m.samples, tr.samples.size());
  EXPECT_GT(m.input_total_variation, 0.0);
  EXPECT_GE(m.peak_input_norm, 4.0);
  ASSERT_EQ(m.component_entry_times.size(), 1u);
  std::ostringstream js;
  write_metrics(m, js);
  const auto doc = nlohmann::json::parse(js.str());
  EXPECT_DOUBLE_EQ(doc.at("input_total_variation").get<double>(), m.input_total_variation);
  EXPECT_TRUE(doc.at("sliding_entry_time").is_number());

  Metrics none;
  none.component_entry_times = {std::nullopt};
  std::ostringstream js2;
  write_metrics(none, js2);
  EXPECT_TRUE(nlohmann::json::parse(js2.str()).at("sliding_entry_time").is_null());
}

TEST(WriteCsv, HeaderAndPrecision) {
  auto s = arm_stabilize(Potential::norm_power(2, 1.3, 2), 0.01, 1e-3);
  const Trace tr = simulate(s);
  std::ostringstream os;
  write_csv(tr, os);
  std::istringstream in(os.str());
  std::string header, first;
  std::getline(in, header);
  std::getline(in, first);
  EXPECT_EQ(header, "t,q1,q2,p1,p2,eta1,eta2,sigma1,sigma2,u1,u2,H,U");
  std::istringstream cells(first);
  std::string cell;
  std::vector<double> row;
  while (std::getline(cells, cell, ',')) row.push_back(std::stod(cell));
  ASSERT_EQ(row.size(), 13u);
  const auto& s0 = tr.samples.front();
  EXPECT_EQ(row[5], s0.eta(0));
  EXPECT_EQ(row[7], s0.sigma(0));
  EXPECT_EQ(row[9], s0.u(0));
  EXPECT_EQ(row[11], s0.H);
}

TEST(Integrator, Names) {
  EXPECT_EQ(integrator_from_string("rk4"), Integrator::Rk4);
  EXPECT_EQ(integrator_from_string(to_string(Integrator::SemiImplicitEuler)),
            Integrator::SemiImplicitEuler);
  EXPECT_THROW(integrator_from_string("euler"), ParameterError);
}
