#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "kramers/analytic.hpp"
#include "kramers/io.hpp"

#ifndef KRAMERS_CLI
#error "KRAMERS_CLI must point at the kramers_cli binary"
#endif

using namespace kramers;
namespace fs = std::filesystem;

namespace {

const std::string kSource = KRAMERS_SOURCE_DIR;

fs::path scratch_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("kramers_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

// Exit status of the CLI; stdout and stderr go to `dir`/log.txt.
int run(const std::string& args, const fs::path& dir, const std::string& env = "") {
  const std::string cmd = env + " \"" + std::string(KRAMERS_CLI) + "\" " + args + " > \"" + (dir / "log.txt").string() +
                          "\" 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

io::Json manifest_of(const fs::path& dir) {
  std::ifstream in(dir / "manifest.json");
  return io::Json::parse(in);
}

std::string src(const std::string& rel) { return "\"" + kSource + "/" + rel + "\""; }

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("path graph spectrum is exact") {
  const auto dir = scratch_dir("path");
  REQUIRE(run("graph-spectrum --config " + src("configs/graph_path.json") + " --out " + dir.string(), dir) == 0);
  const auto k = io::read_column((dir / "raw_levels.dat").string());
  REQUIRE(k.size() == static_cast<std::size_t>(std::floor(60.0 * 1.83 / kPi)));
  for (std::size_t i = 0; i < k.size(); ++i) {
    const Real exact = (i + 1) * kPi / 1.83;
    CHECK(std::abs(k[i] - exact) <= 1e-9 * exact);
  }
  const auto m = manifest_of(dir);
  CHECK(m["experiment"] == "graph-spectrum");
  CHECK(m["outputs"].size() >= 3);
}

TEST_CASE("malformed graph spec is rejected with its line") {
  const auto dir = scratch_dir("badspec");
  CHECK(run("graph-spectrum --spec " + src("tests/data/negative_length.graph") + " --k-max 20 --out " + dir.string(),
            dir) == 2);
  std::ifstream log(dir / "log.txt");
  const std::string text((std::istreambuf_iterator<char>(log)), {});
  CHECK(text.find(":5:") != std::string::npos);
}

TEST_CASE("analytic subcommand") {
  const auto dir = scratch_dir("analytic");
  CHECK(run("analytic --variable R --gamma 0 --out " + dir.string(), dir) == 2);
  CHECK(run("analytic --variable w --gamma 1 --out " + dir.string(), dir) == 2);

  REQUIRE(run("analytic --variable R_tilde --ericson --points 81 --out " + dir.string(), dir) == 0);
  const auto rows = io::read_rows((dir / "curve_R_tilde_ericson.dat").string());
  REQUIRE(rows.size() == 81);
  for (const auto& r : rows) CHECK(std::abs(r[1] - std::exp(-r[0])) <= 1e-12);

  REQUIRE(run("analytic --variable u --gamma 5.7 --class GSE,GUE --points 101 --out " + dir.string(), dir) == 0);
  const auto gse = io::read_rows((dir / "curve_u_GSE_g5.7.dat").string());
  const auto gue = io::read_rows((dir / "curve_u_GUE_g5.7.dat").string());
  REQUIRE(gse.size() == gue.size());
  Real sup = 0.0;
  for (std::size_t i = 0; i < gse.size(); ++i) {
    CHECK(gse[i][0] == gue[i][0]);
    sup = std::max(sup, std::abs(gse[i][1] - gue[i][1]));
  }
  CHECK(sup > 0.05);
}

TEST_CASE("fit-gamma recovers synthetic absorption") {
  const auto dir = scratch_dir("fit");
  for (const auto& [g, tol] : {std::pair{5.7, 0.1}, std::pair{12.8, 0.2}}) {
    analytic::ReflectionSampler sampler({g, SymmetryClass::GSE});
    RandomStream rng(17, static_cast<std::uint64_t>(10 * g));
    const std::string path = (dir / "samples.dat").string();
    io::write_table(path, "synthetic R", {}, {{"R", sampler.sample(rng, 100000)}});
    REQUIRE(run("fit-gamma --samples " + path + " --bootstrap 20 --out " + dir.string(), dir) == 0);
    const auto m = manifest_of(dir);
    CAPTURE(g);
    CHECK(std::abs(m["derived"]["gamma"].get<Real>() - g) <= tol);
  }
  const std::string empty = (dir / "empty.dat").string();
  std::ofstream(empty) << "# nothing\n";
  CHECK(run("fit-gamma --samples " + empty + " --out " + dir.string(), dir) != 0);
  CHECK(run("fit-gamma --samples " + (dir / "absent.dat").string() + " --out " + dir.string(), dir) == 2);
}

TEST_CASE("lossless scattering keeps R at one") {
  const auto dir = scratch_dir("lossless");
  REQUIRE(run("scattering --config " + src("configs/scattering_lossless.json") + " --out " + dir.string(), dir) == 0);
  const auto rows = io::read_rows((dir / "records.dat").string());
  REQUIRE(rows.size() == 500);
  for (const auto& r : rows) CHECK(std::abs(r[5] - 1.0) <= 1e-10);
}

TEST_CASE("seeded runs are reproducible and worker-independent") {
  const auto a = scratch_dir("det_a"), b = scratch_dir("det_b"), c = scratch_dir("det_c");
  const std::string cfg = " --config " + src("configs/scattering_lossless.json") + " --tau-abs 2 --out ";
  REQUIRE(run("scattering" + cfg + a.string(), a) == 0);
  REQUIRE(run("scattering" + cfg + b.string(), b) == 0);
  REQUIRE(run("scattering" + cfg + c.string(), c, "KRAMERS_WORKERS=3") == 0);
  const auto ma = manifest_of(a), mb = manifest_of(b), mc = manifest_of(c);
  REQUIRE(ma["outputs"].size() == mb["outputs"].size());
  for (std::size_t i = 0; i < ma["outputs"].size(); ++i) {
    CHECK(ma["outputs"][i]["fnv1a64"] == mb["outputs"][i]["fnv1a64"]);
    CHECK(ma["outputs"][i]["fnv1a64"] == mc["outputs"][i]["fnv1a64"]);
  }
  CHECK(run("scattering" + cfg + c.string(), c, "KRAMERS_WORKERS=many") == 2);
  CHECK(run("scattering" + cfg + c.string() + " --seed 8", c) == 0);
  CHECK(manifest_of(c)["outputs"][0]["fnv1a64"] != ma["outputs"][0]["fnv1a64"]);
}

}  // TEST_SUITE
