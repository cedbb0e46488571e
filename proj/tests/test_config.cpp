#include <doctest.h>

#include <filesystem>
#include <string>
#include <vector>

#include "boomforce/config.hpp"
#include "boomforce/errors.hpp"
#include "boomforce/serialize.hpp"

using namespace boomforce;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string error_text(auto&& fn, ErrorCode expected) {
  try {
    fn();
  } catch (const Error& e) {
    CHECK(e.code() == expected);
    return e.what();
  }
  FAIL("expected an error");
  return {};
}

const fs::path kReplica = fs::path(BOOMFORCE_CONFIG_DIR) / "paper_replica.json";

}  // namespace

TEST_CASE("bundled replica config equals the built-in defaults") {
  const ScenarioConfig c = load_config(kReplica);
  CHECK(to_json(c) == to_json(ScenarioConfig{}));
  CHECK(c.world.noise_sigma == 0.02);
  CHECK(c.toggles.stiction);
  CHECK(c.setpoint.f_des == -2.0);
}

TEST_CASE("empty document gives defaults; partial documents merge") {
  CHECK(to_json(config_from_json(json::object())) == to_json(ScenarioConfig{}));
  const ScenarioConfig c = config_from_json(json::parse(R"({"spec": {"omega_n": 5}})"));
  CHECK(c.spec.omega_n == 5.0);
  CHECK(c.spec.eta == 1.0);
}

TEST_CASE("json round trip") {
  ScenarioConfig c;
  c.stiffness.k_ee = kRigid;
  c.toggles.lowpass_cutoff = 15.0;
  c.setpoint.y_traj = Trajectory({{0.0, 0.0}, {2.0, 0.1}, {4.0, 0.0}});
  c.world.seed = 123;
  const json j = to_json(c);
  CHECK(j["stiffness"]["k_ee"] == "inf");
  const ScenarioConfig back = config_from_json(json::parse(j.dump()));
  CHECK(to_json(back) == j);
  CHECK(std::isinf(back.stiffness.k_ee));
  CHECK(back.setpoint.y_traj.points().size() == 3);
  CHECK(*back.toggles.lowpass_cutoff == 15.0);
  CHECK(back.world.seed == 123);
}

TEST_CASE("sweep parameters rebuild the reference") {
  const ScenarioConfig c =
      config_from_json(json::parse(R"({"setpoint": {"v_sweep": 0.1, "sweep_distance": 0.5}})"));
  CHECK(c.setpoint.y_traj.points().back().t == doctest::Approx(5.0));
  CHECK(c.setpoint.y_traj.points().back().y == doctest::Approx(0.5));
}

TEST_CASE("unknown keys are rejected with their path") {
  std::string msg = error_text(
      [] { config_from_json(json::parse(R"({"spec": {"omega": 5}})")); }, ErrorCode::kConfig);
  CHECK(msg.find("spec.omega") != std::string::npos);
  msg = error_text([] { config_from_json(json::parse(R"({"extra": 1})")); }, ErrorCode::kConfig);
  CHECK(msg.find("extra") != std::string::npos);
}

TEST_CASE("type errors name the key") {
  std::string msg = error_text(
      [] { config_from_json(json::parse(R"({"spec": {"eta": "high"}})")); }, ErrorCode::kConfig);
  CHECK(msg.find("spec.eta") != std::string::npos);
  msg = error_text([] { config_from_json(json::parse(R"({"world": {"seed": 1.5}})")); },
                   ErrorCode::kConfig);
  CHECK(msg.find("world.seed") != std::string::npos);
  msg = error_text([] { config_from_json(json::parse(R"({"toggles": {"noise": 1}})")); },
                   ErrorCode::kConfig);
  CHECK(msg.find("toggles.noise") != std::string::npos);
}

TEST_CASE("invalid values fail validation") {
  const std::string msg = error_text(
      [] { config_from_json(json::parse(R"({"timing": {"dt_force": 0.0013}})")); },
      ErrorCode::kConfig);
  CHECK(msg.find("timing") != std::string::npos);
  error_text([] { config_from_json(json::parse(R"({"setpoint": {"f_des": 1}})")); },
             ErrorCode::kConfig);
  error_text([] { config_from_json(json::parse(R"({"stiffness": {"k_theta": -1}})")); },
             ErrorCode::kConfig);
}

TEST_CASE("syntax errors report line and column") {
  const std::string msg =
      error_text([] { parse_json_text("{\n  \"spec\": {\n    \"eta\": ,\n  }\n}", "bad.json"); },
                 ErrorCode::kConfig);
  CHECK(msg.find("bad.json") != std::string::npos);
  CHECK(msg.find("line 3") != std::string::npos);
  CHECK(msg.find("column") != std::string::npos);
}

TEST_CASE("overrides") {
  json doc = json::object();
  apply_override(doc, "spec.omega_n=5");
  apply_override(doc, "toggles.noise=false");
  apply_override(doc, "stiffness.k_ee=inf");
  apply_override(doc, "toggles.lowpass_cutoff=12.5");
  const ScenarioConfig c = config_from_json(doc);
  CHECK(c.spec.omega_n == 5.0);
  CHECK_FALSE(c.toggles.noise);
  CHECK(std::isinf(c.stiffness.k_ee));
  CHECK(*c.toggles.lowpass_cutoff == 12.5);

  std::string msg = error_text([] {
    json d = json::object();
    apply_override(d, "spec.bogus=1");
  }, ErrorCode::kConfig);
  CHECK(msg.find("spec.bogus") != std::string::npos);
  error_text([] {
    json d = json::object();
    apply_override(d, "spec=1");
  }, ErrorCode::kConfig);
  error_text([] {
    json d = json::object();
    apply_override(d, "no_equals_sign");
  }, ErrorCode::kConfig);
}

TEST_CASE("overrides are applied before validation") {
  const json doc = json::object();
  const std::vector<std::string> bad = {"timing.dt_force=0.3"};
  const std::string from_override =
      error_text([&] { config_with_overrides(doc, bad); }, ErrorCode::kConfig);
  const std::string from_file = error_text(
      [] { config_from_json(json::parse(R"({"timing": {"dt_force": 0.3}})")); },
      ErrorCode::kConfig);
  CHECK(from_override == from_file);

  // An override can also repair a file value.
  const std::vector<std::string> fix = {"timing.dt_force=0.3", "timing.dt_traj=0.3"};
  CHECK(config_with_overrides(doc, fix).timing.dt_force == 0.3);
}

TEST_CASE("missing config file names the path") {
  const std::string msg =
      error_text([] { load_config("/nonexistent/scenario.json"); }, ErrorCode::kIo);
  CHECK(msg.find("/nonexistent/scenario.json") != std::string::npos);
}

TEST_CASE("phase tokens parse back") {
  CHECK(phase_from_token("approach") == Phase::kApproach);
  CHECK(phase_from_token("stabilize") == Phase::kStabilize);
  CHECK(phase_from_token("sweep") == Phase::kSweep);
  CHECK_THROWS_AS(phase_from_token("Sweep"), Error);
}
