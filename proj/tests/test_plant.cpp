#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "boomforce/errors.hpp"
#include "boomforce/plant.hpp"

using namespace boomforce;
using std::numbers::pi;

namespace {

WorldModel quiet_world(double wall_x) {
  WorldModel w;
  w.wall_x = wall_x;
  w.noise_sigma = 0.0;
  w.mu_s = w.mu_k = w.stiction_coupling = 0.0;
  return w;
}

constexpr double kDt = 5e-4;

}  // namespace

TEST_CASE("contact force is Hooke's law on the nominal penetration") {
  const StiffnessModel m{100.0, kRigid};
  const JointState q{pi / 2, 1.0};  // tip at x = 0
  CHECK(contact_force(q, quiet_world(0.001), m) == 0.0);
  CHECK(contact_force(q, quiet_world(-0.002), m) == doctest::Approx(-0.2));
  CHECK(wall_clearance(q, quiet_world(-0.002)) == doctest::Approx(-0.002));

  // k_eq = 2000 N/m with 1 mm penetration.
  const StiffnessModel stiff{2000.0, kRigid};
  CHECK(contact_force(q, quiet_world(-0.001), stiff) == doctest::Approx(-2.0));
}

TEST_CASE("free-space step integrates the joint command") {
  const RobotParams robot;
  const PlantState s = PlantState::initial({1.0, 0.5}, 1);
  const auto step = plant_step(s, {0.0, 0.02}, quiet_world(5.0), StiffnessModel{}, robot, kDt);
  CHECK(step.state.q_nominal.d2 - 0.5 == doctest::Approx(1e-5).epsilon(1e-9));
  CHECK(step.state.q_nominal.theta1 == 1.0);
  CHECK(step.reading.f_n == 0.0);
  CHECK_FALSE(step.state.in_contact);
  CHECK(step.state.t == doctest::Approx(kDt));
}

TEST_CASE("static contact gives a constant compressive force") {
  const RobotParams robot;
  PlantState s = PlantState::initial({pi / 2, 1.0}, 1);
  const WorldModel w = quiet_world(-0.002);
  const StiffnessModel m{100.0, kRigid};
  for (int i = 0; i < 50; ++i) {
    const auto step = plant_step(s, {}, w, m, robot, kDt);
    CHECK(step.reading.f_n == doctest::Approx(-0.2));
    CHECK(step.reading.f_n < 0.0);
    s = step.state;
  }
}

TEST_CASE("stick-slip breakaway matches a hand integration of the wrist spring") {
  RobotParams robot;
  const StiffnessModel m{100.0, kRigid};
  WorldModel w = quiet_world(-0.001);
  w.mu_s = 0.4;
  w.mu_k = 0.3;
  w.k_wrist = 500.0;
  const double v = 0.1;  // d2 rate; at theta1 = pi/2 this is pure tangential motion

  // Oracle: at pitch pi/2, y = d2 and the penetration stays 1 mm, so the
  // normal load is k_theta / d2^2 * 1e-3. The pad sticks where contact starts
  // (after the first step) and the spring load grows by k_w * v * dt per step.
  int expected_breakaway = -1;
  std::vector<double> expected_ft;
  const double y_anchor = 1.0 + v * kDt;
  for (int k = 1; k <= 10 && expected_breakaway < 0; ++k) {
    const double d2 = 1.0 + k * v * kDt;
    const double normal = 100.0 / (d2 * d2) * 1e-3;
    const double load = w.k_wrist * (d2 - y_anchor);
    if (load > w.mu_s * normal) {
      expected_breakaway = k;
      expected_ft.push_back(w.mu_k * normal);
    } else {
      expected_ft.push_back(load);
    }
  }
  REQUIRE(expected_breakaway == 3);

  PlantState s = PlantState::initial({pi / 2, 1.0}, 0);
  int breakaway = -1;
  for (int k = 1; k <= expected_breakaway; ++k) {
    const auto step = plant_step(s, {0.0, v}, w, m, robot, kDt);
    CHECK(step.reading.f_t == doctest::Approx(expected_ft[k - 1]).epsilon(1e-9));
    if (breakaway < 0 && s.sticking && !step.state.sticking) breakaway = k;
    s = step.state;
  }
  CHECK(breakaway == expected_breakaway);
  // Stick load reached mu_s |f_n| before falling back to the kinetic level.
  CHECK(expected_ft[1] < w.mu_s * 0.1);
  CHECK(s.f_t < expected_ft[1] + w.mu_s * 0.1);
}

TEST_CASE("breakaway transient couples into the normal reading and decays") {
  RobotParams robot;
  const StiffnessModel m{100.0, kRigid};
  WorldModel w = quiet_world(-0.02);
  w.mu_s = 0.4;
  w.mu_k = 0.3;
  w.stiction_coupling = 0.1;
  PlantState s = PlantState::initial({pi / 2, 1.0}, 0);
  std::vector<double> deviation;
  for (int k = 0; k < 400; ++k) {
    const auto step = plant_step(s, {0.0, 0.05}, w, m, robot, kDt);
    deviation.push_back(step.reading.f_n - contact_force(step.state.q_nominal, w, m));
    s = step.state;
  }
  const double peak = *std::max_element(deviation.begin(), deviation.end());
  CHECK(peak > 0.0);
  CHECK(peak <= w.stiction_coupling * w.mu_s * 2.0 + 1e-9);
  REQUIRE_FALSE(s.sticking);
  const double expected =
      w.stiction_coupling * s.breakaway_load * std::exp(-s.slip_distance / w.slip_length);
  CHECK(deviation.back() == doctest::Approx(expected).epsilon(1e-9));
  CHECK(deviation.back() < 0.05 * peak);
}

TEST_CASE("stick load never exceeds the static limit") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> rate(-0.2, 0.2);
  RobotParams robot;
  const StiffnessModel m{60.0, 5000.0};
  WorldModel w = quiet_world(0.15);
  w.mu_s = 0.4;
  w.mu_k = 0.3;
  PlantState s = PlantState::initial({1.1, 0.3}, 0);
  for (int k = 0; k < 4000; ++k) {
    const JointVelocity qd{rate(rng), rate(rng) * 0.5};
    const auto step = plant_step(s, qd, w, m, robot, kDt);
    s = step.state;
    if (s.sticking) {
      REQUIRE(s.in_contact);
      CHECK(std::abs(s.f_t) <= w.mu_s * std::abs(contact_force(s.q_nominal, w, m)) + 1e-9);
    }
    if (!s.in_contact) CHECK(step.reading.f_n == 0.0);
  }
}

TEST_CASE("joint limits clamp the motion and raise the flag") {
  RobotParams robot;
  PlantState s = PlantState::initial({1.0, robot.d2_max - 1e-6}, 0);
  const auto step = plant_step(s, {0.0, 1.0}, quiet_world(5.0), StiffnessModel{}, robot, kDt);
  CHECK(step.limit_hit);
  CHECK(step.state.q_nominal.d2 == robot.d2_max);
  CHECK(step.state.limit_pinned_time == doctest::Approx(kDt));
}

TEST_CASE("noise off draws no random numbers; noise on is seeded") {
  PlantState a = PlantState::initial({pi / 2, 1.0}, 7);
  const std::mt19937_64 before = a.rng;
  sense(a, quiet_world(-0.002), StiffnessModel{100.0, kRigid});
  CHECK(a.rng == before);

  WorldModel noisy = quiet_world(-0.002);
  noisy.noise_sigma = 0.02;
  PlantState b = PlantState::initial({pi / 2, 1.0}, 7);
  PlantState c = PlantState::initial({pi / 2, 1.0}, 7);
  double sum = 0.0;
  double sq = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const double fb = sense(b, noisy, StiffnessModel{100.0, kRigid}).f_n;
    CHECK(fb == sense(c, noisy, StiffnessModel{100.0, kRigid}).f_n);
    sum += fb + 0.2;
    sq += (fb + 0.2) * (fb + 0.2);
  }
  CHECK(std::abs(sum / n) < 1e-3);
  CHECK(std::sqrt(sq / n) == doctest::Approx(0.02).epsilon(0.03));
}

TEST_CASE("timing validation") {
  CHECK_NOTHROW(validate(LoopTiming{}));
  CHECK_THROWS_AS(validate(LoopTiming{5e-4, 1.2e-3, 0.1}), Error);
  CHECK_THROWS_AS(validate(LoopTiming{5e-4, 0.2, 0.1}), Error);
  CHECK_THROWS_AS(validate(LoopTiming{0.0, 2e-3, 0.1}), Error);
}

TEST_CASE("world validation") {
  CHECK_NOTHROW(validate(WorldModel{}));
  WorldModel w;
  w.mu_k = 0.5;
  CHECK_THROWS_AS(validate(w), Error);
  w = WorldModel{};
  w.stiction_coupling = 1.5;
  CHECK_THROWS_AS(validate(w), Error);
  w = WorldModel{};
  w.noise_sigma = -1.0;
  CHECK_THROWS_AS(validate(w), Error);
}

TEST_CASE("scheduler: one trace row per force tick") {
  TimelineCallbacks cb;
  cb.on_force = [](const SensorReading&, const PlantState&, double) { return ForceCommand{}; };
  const auto r = run_timeline(1.0, LoopTiming{}, cb, quiet_world(5.0), StiffnessModel{},
                              RobotParams{}, {1.0, 0.5});
  REQUIRE(r.trace.size() == 500);
  for (std::size_t i = 0; i < r.trace.size(); ++i) {
    CHECK(r.trace[i].t == doctest::Approx(i * 2e-3).epsilon(1e-12));
    if (i > 0) CHECK(r.trace[i].t > r.trace[i - 1].t);
  }
  CHECK(r.final_state.t == doctest::Approx(1.0));
}

TEST_CASE("scheduler: zero command leaves the arm and force unchanged") {
  TimelineCallbacks cb;
  cb.on_force = [](const SensorReading&, const PlantState&, double) { return ForceCommand{}; };
  const JointState q0{pi / 2, 1.0};
  const auto r = run_timeline(0.5, LoopTiming{}, cb, quiet_world(-0.002),
                              StiffnessModel{100.0, kRigid}, RobotParams{}, q0);
  for (const TraceSample& s : r.trace) {
    CHECK(s.theta1 == q0.theta1);
    CHECK(s.d2 == q0.d2);
    CHECK(s.f_n == doctest::Approx(-0.2));
  }
}

TEST_CASE("scheduler: fixed callback order and delayed position estimate") {
  std::vector<std::string> order;
  std::vector<PositionEstimate> estimates;
  std::vector<double> traj_times;
  TimelineCallbacks cb;
  cb.on_trajectory = [&](const PositionEstimate& est, double t) {
    order.push_back("traj");
    estimates.push_back(est);
    traj_times.push_back(t);
  };
  cb.on_force = [&](const SensorReading&, const PlantState&, double) {
    order.push_back("force");
    ForceCommand c;
    c.qdot = {0.0, 0.1};  // extend at pitch pi/2: y rises at 0.1 m/s
    return c;
  };
  const LoopTiming timing{5e-4, 2e-3, 0.01};
  run_timeline(0.05, timing, cb, quiet_world(5.0), StiffnessModel{}, RobotParams{},
               {pi / 2, 0.5});
  REQUIRE(order.size() >= 2);
  CHECK(order[0] == "traj");
  CHECK(order[1] == "force");
  REQUIRE(estimates.size() == 5);
  CHECK(estimates[0].t == 0.0);
  CHECK(estimates[0].y == doctest::Approx(0.5));
  for (std::size_t k = 1; k < estimates.size(); ++k) {
    // Sampled one trajectory period before delivery.
    CHECK(traj_times[k] == doctest::Approx(0.01 * k));
    CHECK(estimates[k].t == doctest::Approx(0.01 * (k - 1)));
    CHECK(estimates[k].y == doctest::Approx(0.5 + 0.1 * 0.01 * (k - 1)).epsilon(1e-9));
  }
}

TEST_CASE("scheduler: stop request ends the run after logging") {
  int calls = 0;
  TimelineCallbacks cb;
  cb.on_force = [&](const SensorReading&, const PlantState&, double) {
    ForceCommand c;
    c.stop = ++calls == 10;
    return c;
  };
  const auto r = run_timeline(1.0, LoopTiming{}, cb, quiet_world(5.0), StiffnessModel{},
                              RobotParams{}, {1.0, 0.5});
  CHECK(r.stopped_early);
  CHECK(r.trace.size() == 10);
}

TEST_CASE("scheduler: identical seeds give identical traces") {
  WorldModel w;
  w.wall_x = -0.002;
  auto run = [&](std::uint64_t seed) {
    w.seed = seed;
    TimelineCallbacks cb;
    cb.on_force = [](const SensorReading&, const PlantState&, double) {
      ForceCommand c;
      c.qdot = {0.0, 0.01};
      return c;
    };
    return run_timeline(0.5, LoopTiming{}, cb, w, StiffnessModel{100.0, kRigid},
                        RobotParams{}, {pi / 2, 1.0})
        .trace;
  };
  const Trace a = run(42);
  const Trace b = run(42);
  const Trace c = run(43);
  REQUIRE(a.size() == b.size());
  bool same = true;
  bool differs = false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    same = same && a[i].f_n == b[i].f_n && a[i].d2 == b[i].d2;
    differs = differs || a[i].f_n != c[i].f_n;
  }
  CHECK(same);
  CHECK(differs);
}

TEST_CASE("phase tokens") {
  CHECK(to_token(Phase::kApproach) == "approach");
  CHECK(to_token(Phase::kStabilize) == "stabilize");
  CHECK(to_token(Phase::kSweep) == "sweep");
}
