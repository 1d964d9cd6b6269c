// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "dlp/bench.hpp"
#include "dlp/cli.hpp"
#include "dlp/errors.hpp"
#include "dlp/instance.hpp"
#include "dlp/io.hpp"
#include "doctest.h"
#include "json.hpp"

using namespace dlp;

namespace {

int run_cli(std::initializer_list<const char*> args) {
  std::vector<const char*> argv{"dantzig_lp"};
  argv.insert(argv.end(), args.begin(), args.end());
  return cli_main(static_cast<int>(argv.size()), argv.data());
}

std::filesystem::path temp_dir(const std::string& tag) {
  auto dir = std::filesystem::temp_directory_path() / ("dlp_test_" + tag);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("ds instance generation honors the construction protocol") {
  InstanceSpec spec;
  spec.kind = InstanceKind::ds;
  spec.n = 50;
  spec.p = 120;
  spec.seed = 9;
  Instance inst = generate_instance(spec);

  SUBCASE("columns are unit norm and the support has floor(n/5) entries") {
    for (int j = 0; j < spec.p; ++j) {
      CHECK(std::fabs(inst.x.col_norm_sq(j) - 1.0) <= 1e-12);
    }
    int nnz = 0;
    for (double b : inst.beta0) {
      if (b != 0.0) ++nnz;
    }
    CHECK(nnz == 10);
  }
  SUBCASE("identical specs generate bit-identical data") {
    Instance again = generate_instance(spec);
    CHECK(again.x == inst.x);
    CHECK(again.y == inst.y);
    CHECK(again.beta0 == inst.beta0);
  }
  SUBCASE("different seeds differ") {
    InstanceSpec other = spec;
    other.seed = 10;
    CHECK_FALSE(generate_instance(other).y == inst.y);
  }
  SUBCASE("y decomposes as X beta0 + e0") {
    std::vector<double> fit(spec.n, 0.0);
    inst.x.mul(inst.beta0, fit);
    for (int i = 0; i < spec.n; ++i) {
      CHECK(std::fabs(inst.y[i] - fit[i] - inst.noise[i]) <= 1e-12);
    }
  }
}

TEST_CASE("sparsification zeroes roughly pi of the entries") {
  InstanceSpec spec;
  spec.kind = InstanceKind::ds;
  spec.n = 200;
  spec.p = 400;
  spec.pi = 0.95;
  spec.seed = 4;
  Instance inst = generate_instance(spec);
  const double density =
      static_cast<double>(inst.x.nnz()) / (200.0 * 400.0);
  CHECK(density < 0.10);  // >= 90% zeroed
  CHECK(density > 0.02);
}

TEST_CASE("snr calibration lands near the requested ratio") {
  // Monte Carlo over seeds at n = 500: Var(X beta0)/sigma^2 in [8, 12].
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    InstanceSpec spec;
    spec.kind = InstanceKind::ds;
    spec.n = 500;
    spec.p = 200;
    spec.snr = 10.0;
    spec.seed = seed;
    Instance inst = generate_instance(spec);
    std::vector<double> signal(spec.n, 0.0);
    inst.x.mul(inst.beta0, signal);
    double s_mean = 0.0, n_mean = 0.0;
    for (double v : signal) s_mean += v;
    for (double v : inst.noise) n_mean += v;
    s_mean /= spec.n;
    n_mean /= spec.n;
    double s_var = 0.0, n_var = 0.0;
    for (double v : signal) s_var += (v - s_mean) * (v - s_mean);
    for (double v : inst.noise) n_var += (v - n_mean) * (v - n_mean);
    const double ratio = s_var / n_var;
    CHECK(ratio >= 8.0);
    CHECK(ratio <= 12.0);
  }
}

TEST_CASE("equicorrelation parameter shifts the average column inner product") {
  InstanceSpec flat;
  flat.kind = InstanceKind::ds;
  flat.n = 300;
  flat.p = 80;
  flat.seed = 6;
  InstanceSpec corr = flat;
  corr.rho = 0.8;
  Instance a = generate_instance(flat);
  Instance b = generate_instance(corr);
  auto mean_offdiag = [&](const Instance& inst) {
    double acc = 0.0;
    int count = 0;
    std::vector<double> dense_j(inst.spec.n);
    for (int j = 0; j < 10; ++j) {
      dense_j.assign(inst.spec.n, 0.0);
      auto rows = inst.x.col_rows(j);
      auto vals = inst.x.col_values(j);
      for (std::size_t k = 0; k < rows.size(); ++k) dense_j[rows[k]] = vals[k];
      for (int l = j + 1; l < 10; ++l) {
        acc += inst.x.col_dot(l, dense_j);
        ++count;
      }
    }
    return acc / count;
  };
  CHECK(std::fabs(mean_offdiag(a)) < 0.25);
  CHECK(mean_offdiag(b) > 0.5);
}

TEST_CASE("fused instances") {
  SUBCASE("zero knots means a constant signal") {
    InstanceSpec spec;
    spec.kind = InstanceKind::fused_signal;
    spec.n = 40;
    spec.knot_count = 0;
    spec.seed = 2;
    Instance inst = generate_instance(spec);
    for (int i = 1; i < 40; ++i) CHECK(inst.beta0[i] == inst.beta0[0]);
  }
  SUBCASE("knot count is exact") {
    InstanceSpec spec;
    spec.kind = InstanceKind::fused_signal;
    spec.n = 100;
    spec.knot_count = 3;
    spec.seed = 3;
    Instance inst = generate_instance(spec);
    int jumps = 0;
    for (int i = 1; i < 100; ++i) {
      if (inst.beta0[i] != inst.beta0[i - 1]) ++jumps;
    }
    CHECK(jumps == 3);
  }
  SUBCASE("regression kind draws a raw gaussian design with 20 knots") {
    InstanceSpec spec;
    spec.kind = InstanceKind::fused_regression;
    spec.n = 80;
    spec.p = 150;
    spec.knot_count = 20;
    spec.seed = 4;
    Instance inst = generate_instance(spec);
    CHECK(inst.x.n_rows() == 80);
    CHECK(inst.x.n_cols() == 150);
    // unnormalized: column norms concentrate near sqrt(n), not 1
    CHECK(inst.x.col_norm_sq(0) > 10.0);
    int jumps = 0;
    for (int i = 1; i < 150; ++i) {
      if (inst.beta0[i] != inst.beta0[i - 1]) ++jumps;
    }
    CHECK(jumps == 20);
  }
}

TEST_CASE("lambda_grid") {
  SUBCASE("single point grid is the upper anchor") {
    auto g = lambda_grid(0.1, 2.0, 1);
    REQUIRE(g.size() == 1);
    CHECK(g[0] == 2.0);
  }
  SUBCASE("log spacing has a constant consecutive ratio") {
    auto g = lambda_grid(0.05, 5.0, 50);
    REQUIRE(g.size() == 50);
    CHECK(g.front() == 5.0);
    CHECK(g.back() == 0.05);
    const double ratio = g[1] / g[0];
    for (std::size_t k = 1; k < g.size(); ++k) {
      CHECK(std::fabs(g[k] / g[k - 1] - ratio) <= 1e-12);
      CHECK(g[k] < g[k - 1]);
    }
  }
  SUBCASE("invalid anchors raise") {
    CHECK_THROWS_AS(lambda_grid(-1.0, 2.0, 5), InvalidAnchor);
    CHECK_THROWS_AS(lambda_grid(3.0, 2.0, 5), InvalidAnchor);
    CHECK_THROWS_AS(lambda_grid(1.0, 2.0, 0), InvalidAnchor);
  }
}

TEST_CASE("matrix market and csv round trips are bit exact") {
  auto dir = temp_dir("io");
  InstanceSpec spec;
  spec.kind = InstanceKind::ds;
  spec.n = 30;
  spec.p = 50;
  spec.pi = 0.4;
  spec.seed = 12;
  Instance inst = generate_instance(spec);

  write_matrix_market(dir / "x.mtx", inst.x);
  SparseMatrix back = read_matrix_market(dir / "x.mtx");
  CHECK(back == inst.x);

  write_csv_vector(dir / "y.csv", inst.y);
  std::vector<double> y_back = read_csv_vector(dir / "y.csv");
  REQUIRE(y_back.size() == inst.y.size());
  for (std::size_t i = 0; i < inst.y.size(); ++i) CHECK(y_back[i] == inst.y[i]);
  std::filesystem::remove_all(dir);
}

TEST_CASE("all five ablation variants agree on the objective") {
  InstanceSpec spec;
  spec.kind = InstanceKind::ds;
  spec.n = 25;
  spec.p = 80;
  spec.seed = 21;
  Instance inst = generate_instance(spec);
  LambdaAnchors anchors = instance_anchors(inst);
  const double lambda = anchors.noise_level;

  const AblationVariant variants[] = {
      AblationVariant::full, AblationVariant::lasso_init_cg_cc,
      AblationVariant::random_init, AblationVariant::constraint_only,
      AblationVariant::column_only};
  double reference = -1.0;
  for (AblationVariant v : variants) {
    RunResult r = run_ablation(inst, lambda, v);
    CHECK(r.status == "optimal");
    if (reference < 0.0) {
      reference = r.objective;  // the full LP defines the oracle value
    } else {
      CHECK(std::fabs(r.objective - reference) <= 1e-6 * (1.0 + reference));
    }
    if (v == AblationVariant::constraint_only) {
      CHECK(r.set_j_size == spec.p);
    }
    if (v == AblationVariant::column_only) {
      CHECK(r.set_i_size == spec.p);
    }
  }
}

TEST_CASE("bench harness runs cells deterministically") {
  std::vector<BenchCell> cells;
  for (std::uint64_t s = 1; s <= 2; ++s) {
    BenchCell cell;
    cell.spec.kind = InstanceKind::ds;
    cell.spec.n = 20;
    cell.spec.p = 40;
    cell.spec.seed = s;
    cell.variant = AblationVariant::lasso_init_cg_cc;
    cell.tau = 2.0;
    cells.push_back(cell);
  }
  auto a = run_bench(cells, 1);
  auto b = run_bench(cells, 2);
  REQUIRE(a.size() == 2);
  REQUIRE(b.size() == 2);
  for (std::size_t k = 0; k < 2; ++k) {
    CHECK(a[k].objective == b[k].objective);
    CHECK(a[k].spec.seed == b[k].spec.seed);
  }
}

TEST_CASE("cli: ds grid run writes one result per lambda and exits cleanly") {
  auto dir = temp_dir("cli_ds");
  const std::string out = (dir / "res.json").string();
  const int code = run_cli({"ds", "--n", "20", "--p", "60", "--seed", "1",
                            "--lambda-grid", "5:auto:auto", "--out",
                            out.c_str()});
  CHECK(code == 0);
  std::ifstream in(out);
  REQUIRE(in.good());
  nlohmann::json doc = nlohmann::json::parse(in);
  CHECK(doc["schema_version"] == 1);
  REQUIRE(doc["results"].size() == 5);
  double prev = -1.0;
  for (const auto& r : doc["results"]) {
    CHECK(r["status"] == "optimal");
    const double obj = r["objective"].get<double>();
    CHECK(obj >= prev - 1e-9);  // descending grid, growing l1 norm
    prev = obj;
  }
  std::filesystem::remove_all(dir);
}

TEST_CASE("cli: missing --in-y with --in-x is a usage error") {
  auto dir = temp_dir("cli_err");
  InstanceSpec spec;
  spec.kind = InstanceKind::ds;
  spec.n = 10;
  spec.p = 20;
  spec.seed = 7;
  Instance inst = generate_instance(spec);
  write_matrix_market(dir / "X.mtx", inst.x);
  const std::string xpath = (dir / "X.mtx").string();
  CHECK(run_cli({"ds", "--in-x", xpath.c_str()}) == 1);
  std::filesystem::remove_all(dir);
}

TEST_CASE("cli: gen writes reloadable files") {
  auto dir = temp_dir("cli_gen");
  const std::string out = dir.string();
  CHECK(run_cli({"gen", "--kind", "ds", "--n", "10", "--p", "20", "--seed",
                 "7", "--out", out.c_str()}) == 0);
  SparseMatrix x = read_matrix_market(dir / "X.mtx");
  std::vector<double> y = read_csv_vector(dir / "y.csv");
  std::vector<double> beta0 = read_csv_vector(dir / "beta0.csv");

  InstanceSpec spec;
  spec.kind = InstanceKind::ds;
  spec.n = 10;
  spec.p = 20;
  spec.seed = 7;
  Instance inst = generate_instance(spec);
  CHECK(x == inst.x);
  CHECK(y == inst.y);
  CHECK(beta0 == inst.beta0);

  // Loaded data solves through the CLI with an explicit lambda.
  const std::string xpath = (dir / "X.mtx").string();
  const std::string ypath = (dir / "y.csv").string();
  const std::string res = (dir / "res.json").string();
  CHECK(run_cli({"ds", "--in-x", xpath.c_str(), "--in-y", ypath.c_str(),
                 "--lambda", "0.5", "--out", res.c_str()}) == 0);
  std::filesystem::remove_all(dir);
}

TEST_CASE("cli: bench subcommand emits a full variant sweep") {
  auto dir = temp_dir("cli_bench");
  const std::string out = (dir / "bench.json").string();
  const int code =
      run_cli({"bench", "--n", "20", "--p", "40", "--seeds", "2", "--variant",
               "all", "--out", out.c_str()});
  CHECK(code == 0);
  std::ifstream in(out);
  nlohmann::json doc = nlohmann::json::parse(in);
  REQUIRE(doc["results"].size() == 10);  // 2 seeds x 5 variants
  // Same seed, same objective across variants.
  for (int s = 0; s < 2; ++s) {
    double ref = -1.0;
    for (int v = 0; v < 5; ++v) {
      const auto& r = doc["results"][5 * s + v];
      const double obj = r["objective"].get<double>();
      if (ref < 0) {
        ref = obj;
      } else {
        CHECK(std::fabs(obj - ref) <= 1e-6 * (1.0 + ref));
      }
    }
  }
  std::filesystem::remove_all(dir);
}

TEST_CASE("degenerate parameters fail loudly") {
  InstanceSpec spec;
  spec.kind = InstanceKind::ds;
  spec.n = 5;
  spec.p = 4;
  spec.seed = 1;
  spec.pi = 1.0;
  CHECK_THROWS_AS(generate_instance(spec), InvalidBound);
  spec.pi = 0.0;
  spec.rho = 1.0;
  CHECK_THROWS_AS(generate_instance(spec), InvalidBound);
  // Deterministic for the fixed seed: the redraw budget runs out.
  spec.rho = 0.0;
  spec.pi = 0.999999;
  CHECK_THROWS_AS(generate_instance(spec), DegenerateColumn);
}
