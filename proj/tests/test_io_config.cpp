#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include "cable/config.hpp"
#include "cable/errors.hpp"
#include "cable/io.hpp"

using namespace cable;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "cable_io_test";
  fs::create_directories(dir);
  return dir / name;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int config_error_line(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.line();
  }
  return -1;
}

}  // namespace

TEST_CASE("format_double round trips") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  for (int i = 0; i < 1000; ++i) {
    const double v = u(rng) * std::pow(10.0, i % 40 - 20);
    CHECK(std::strtod(io::format_double(v).c_str(), nullptr) == v);
  }
  CHECK(io::format_double(0.1) == "0.10000000000000001");
}

TEST_CASE("binary field round trip and header") {
  SamplingGrid g{5, 3, 2.0};
  auto f = make_empty_field(g, 7.0, MethodTag::FdCoupled);
  for (std::size_t i = 0; i < f.values_u.size(); ++i) {
    f.values_u[i] = std::sin(1.0 + i);
    f.values_ut[i] = std::cos(0.3 * i);
  }
  const auto p = scratch("field.bin");
  io::write_field_binary(p, f);
  const auto raw = slurp(p);
  REQUIRE(raw.size() == 4 + 4 + 4 + 8 + 8 + 8 + 8 + 2 * 15 * 8);
  CHECK(raw.substr(0, 4) == "CWV1");
  std::uint32_t tag = 0;
  std::uint64_t nx = 0;
  double len = 0;
  std::memcpy(&tag, raw.data() + 4, 4);
  std::memcpy(&nx, raw.data() + 12, 8);
  std::memcpy(&len, raw.data() + 28, 8);
  CHECK(tag == 2u);
  CHECK(nx == 5u);
  CHECK(len == 7.0);

  const auto back = io::read_field_binary(p);
  CHECK(back.values_u == f.values_u);
  CHECK(back.values_ut == f.values_ut);
  CHECK(back.method_tag == MethodTag::FdCoupled);
  CHECK(back.grid.nt == 3);
  CHECK(back.grid.horizon == 2.0);

  std::ofstream(scratch("junk.bin"), std::ios::binary) << "NOPE0000";
  CHECK_THROWS(io::read_field_binary(scratch("junk.bin")));
}

TEST_CASE("field CSV is reproducible") {
  SamplingGrid g{4, 2, 1.0};
  auto f = make_empty_field(g, 3.0, MethodTag::GalerkinExact);
  f.values_u[5] = 1.0 / 3.0;
  io::write_field_csv(scratch("a.csv"), f);
  io::write_field_csv(scratch("b.csv"), f);
  const auto text = slurp(scratch("a.csv"));
  CHECK(text == slurp(scratch("b.csv")));
  CHECK(text.rfind("t,x,u,u_t\n", 0) == 0);
  CHECK(text.find("0.33333333333333331") != std::string::npos);
}

TEST_CASE("frequency CSV") {
  const auto p = scratch("freq.csv");
  std::ofstream(p) << "# measured\n0.5\n\n1.25 \n# end\n";
  const auto s = io::read_frequency_csv(p);
  REQUIRE(s.frequencies_hz.size() == 2);
  CHECK(s.frequencies_hz[1] == 1.25);

  std::ofstream(p) << "0.5\n# note\nabc\n";
  try {
    io::read_frequency_csv(p);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.line() == 3);
  }
}

TEST_CASE("config parsing") {
  const std::string text =
      "cable:\n"
      "  length_L: 70\n"
      "  tension_T: 4535\n"
      "  supports:\n"
      "    - {position_xk: 17.5, stiffness_K: 4535}\n"
      "grid: {nx: 141, nt: 11, horizon: 1}\n"
      "initial_data: {phi: 'sine_mode:2,0.1'}\n"
      "solver: {name: fd-coupled}\n";
  const auto rc = parse_config(text);
  CHECK(rc.tension() == 4535.0);
  CHECK(rc.cable().supports()[0].sigma_k == doctest::Approx(1.0));
  CHECK(rc.grid.nx == 141);
  CHECK(rc.solver.name == "fd-coupled");

  const auto again = parse_config(rc.canonical_yaml());
  CHECK(again.canonical_yaml() == rc.canonical_yaml());
  CHECK(again.digest() == rc.digest());
  CHECK(rc.digest().size() == 64);
  auto changed = rc;
  changed.grid.nt = 12;
  CHECK(changed.digest() != rc.digest());
}

TEST_CASE("config errors carry line numbers") {
  CHECK(config_error_line("cable:\n  length_L: 70\n  tension_T: 1\n  colour: red\n") == 4);
  CHECK(config_error_line("cable:\n  length_L: 70\n  tension_T: 1\n  wave_speed_a: 1\n") == 2);
  CHECK(config_error_line("cable:\n  length_L: 70\n") == 2);
  CHECK(config_error_line("cable:\n  length_L: 70\n  tension_T: 1\ngrid:\n  nx: many\n") == 5);
  CHECK(config_error_line("cable: {length_L: 70, tension_T: 1}\nsolver:\n  name: magic\n") == 3);
  CHECK(config_error_line("cable: {length_L: 70, tension_T: -1}\n") == 1);
  CHECK(config_error_line("cable: {length_L: 70, tension_T: 1}\ngrid:\n  nx: 1\n") == 3);
  CHECK(config_error_line("cable: [\n") >= 1);
}

TEST_CASE("presets") {
  for (const auto& name : preset_names()) CHECK_NOTHROW(preset(name).cable());
  const auto p = preset("paper-2-4-sigma1");
  CHECK(p.length_L == 70.0);
  CHECK(*p.wave_speed_a == 67.344);
  CHECK(p.grid.horizon == 10.0);
  CHECK(p.supports[0].position_xk == 17.5);
  CHECK(*p.supports[0].sigma_k == 1.0);
  CHECK(*preset("paper-2-4-sigma0.005").supports[0].sigma_k == 0.005);
  CHECK(preset("paper-2-4-unsupported").supports.empty());
  const auto d = p.initial_data();
  CHECK(d.phi(17.5) == doctest::Approx(0.1 * std::sin(std::numbers::pi * 17.5 / 35.0)));
  CHECK(d.psi(30.0) == 0.0);
  CHECK_THROWS_AS(preset("nope"), ConfigError);
}

TEST_CASE("sha256 known answer") {
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

TEST_CASE("json numbers round trip") {
  TensionEstimate e;
  e.tension_hat = 4535.2327359999998;
  e.residual = 1.0 / 3.0;
  const auto j = io::to_json(e);
  const auto back = io::Json::parse(j.dump());
  CHECK(back["tension_hat"].get<double>() == e.tension_hat);
  CHECK(back["residual"].get<double>() == e.residual);
}
