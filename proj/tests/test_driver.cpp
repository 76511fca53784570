#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "hdgsc/driver.hpp"

using namespace hdgsc;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  REQUIRE(f.good());
  std::ostringstream os;
  os << f.rdbuf();
  return os.str();
}

std::filesystem::path temp_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("hdgsc_test_" + name);
  std::filesystem::remove_all(dir);
  return dir;
}

}  // namespace

TEST_CASE("config serialization round-trips through the parser") {
  RunConfig c;
  c.experiment = "metamaterial";
  c.methods = {"cg", "hdg"};
  c.k = 3;
  c.levels = {8, 16};
  c.sigma_plus = 2.0;
  c.kappa = -1.6;
  c.gamma = 0.5;
  c.pattern = MeshPattern::UniformDiagonals;
  c.out = "somewhere";
  c.quad_degree = 10;
  c.slice_y = 1.0;
  c.samples = 77;
  std::istringstream in(serialize_config(c));
  const RunConfig d = parse_config(in);
  CHECK(d.experiment == c.experiment);
  CHECK(d.methods == c.methods);
  CHECK(d.k == c.k);
  CHECK(d.levels == c.levels);
  CHECK(d.sigma_plus == doctest::Approx(c.sigma_plus));
  CHECK(d.kappa == doctest::Approx(c.kappa));
  CHECK(d.gamma == doctest::Approx(c.gamma));
  CHECK(d.pattern == c.pattern);
  CHECK(d.out == c.out);
  CHECK(d.quad_degree == c.quad_degree);
  CHECK(d.slice_y == doctest::Approx(c.slice_y));
  CHECK(d.samples == c.samples);
}

TEST_CASE("unknown config keys and malformed lines are rejected") {
  RunConfig c;
  CHECK_THROWS_AS(apply_config_line(c, "bogus", "1"), Error);
  std::istringstream in("no_equals_sign_here");
  CHECK_THROWS_AS(parse_config(in), Error);
}

TEST_CASE("config validation catches bad values") {
  RunConfig c;
  c.experiment = "nope";
  CHECK_THROWS_AS(c.validate(), Error);
  c = RunConfig{};
  c.levels = {8, 8};
  CHECK_THROWS_AS(c.validate(), Error);
  c = RunConfig{};
  c.methods = {"cg"};
  c.k = 0;
  CHECK_THROWS_AS(c.validate(), Error);
}

TEST_CASE("convergence study writes CSV with the canonical header and format") {
  RunConfig c;
  c.experiment = "cavity";
  c.methods = {"hdg"};
  c.k = 1;
  c.levels = {2, 4};
  c.kappa = -2.0;
  const auto dir = temp_dir("csv");
  c.out = dir.string();
  run_convergence_study(c);
  const std::string csv = slurp(dir / "cavity_hdg_k1.csv");
  CHECK(csv.rfind("cells,h,e_u,rate_u,e_q_l2,rate_q_l2,e_q_vh,rate_q_vh,e_ubar,rate_ubar,"
                  "e_ustar,rate_ustar\n", 0) == 0);
  CHECK(csv.find("\r") == std::string::npos);      // LF line endings
  CHECK(csv.find("e-0") != std::string::npos);     // scientific notation
  const bool has_cell_row =
      csv.find("16,") == 0 || csv.find("\n16,") != std::string::npos;  // 2x2x4 cells
  CHECK(has_cell_row);
  // Metadata sidecar round-trips to the originating configuration.
  const std::string meta = slurp(dir / "cavity_hdg_k1.meta");
  std::istringstream in(meta.substr(0, meta.find("method=")));
  const RunConfig back = parse_config(in);
  CHECK(back.kappa == doctest::Approx(c.kappa));
  CHECK(back.levels == c.levels);
  std::filesystem::remove_all(dir);
}

TEST_CASE("re-running the same study yields bit-identical output") {
  RunConfig c;
  c.methods = {"hdg", "cg"};
  c.k = 2;
  c.levels = {2, 4};
  c.kappa = -1.5;
  const auto dir1 = temp_dir("det1"), dir2 = temp_dir("det2");
  c.out = dir1.string();
  run_convergence_study(c);
  c.out = dir2.string();
  run_convergence_study(c);
  for (const char* name : {"cavity_hdg_k2.csv", "cavity_cg_k2.csv"})
    CHECK(slurp(dir1 / name) == slurp(dir2 / name));
  std::filesystem::remove_all(dir1);
  std::filesystem::remove_all(dir2);
}

TEST_CASE("the meta-material experiment refuses a convergence study") {
  RunConfig c;
  c.experiment = "metamaterial";
  c.kappa = -1.5;
  c.levels = {2};
  CHECK_THROWS_AS(run_convergence_study(c), Error);
}

TEST_CASE("field output writes element samples and a slice") {
  RunConfig c;
  c.experiment = "cavity";
  c.methods = {"hdg", "cg"};
  c.k = 1;
  c.levels = {4};
  c.kappa = -2.0;
  c.slice_y = 0.5;
  c.samples = 10;
  const auto dir = temp_dir("field");
  c.out = dir.string();
  run_field_output(c);
  CHECK(slurp(dir / "field_hdg.csv").rfind("x,y,u,ustar\n", 0) == 0);
  CHECK(slurp(dir / "field_cg.csv").rfind("x,y,u\n", 0) == 0);
  const std::string slice = slurp(dir / "slice.csv");
  CHECK(slice.rfind("x1,u_hdg,u_cg,u_exact\n", 0) == 0);
  CHECK(std::count(slice.begin(), slice.end(), '\n') == 11);  // header + samples
  std::filesystem::remove_all(dir);
}

TEST_CASE("a slice outside the domain is reported as a CLI error") {
  RunConfig c;
  c.levels = {2};
  c.kappa = -2.0;
  c.slice_y = 7.0;
  c.out = temp_dir("badslice").string();
  CHECK_THROWS_AS(run_field_output(c), Error);
}
