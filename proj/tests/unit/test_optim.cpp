// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "prescient/optim.hpp"
#include "prescient/rng.hpp"

using namespace prescient;
using optim::ComplexMatrix;

namespace {

// Vertices of {x >= 0, a_j . x <= b_j} for 3 variables, by active-set
// enumeration; used to pin the linear-program optimum independently.
double lp_vertex_max(const std::vector<double>& c,
                     const std::vector<std::vector<double>>& a,
                     const std::vector<double>& b) {
  const int n = 3;
  std::vector<std::vector<double>> rows;
  std::vector<double> rhs;
  for (size_t j = 0; j < a.size(); ++j) {
    rows.push_back(a[j]);
    rhs.push_back(b[j]);
  }
  for (int i = 0; i < n; ++i) {
    std::vector<double> e(n, 0.0);
    e[i] = 1.0;
    rows.push_back(e);
    rhs.push_back(0.0);
  }
  double best = -1e300;
  const int m = static_cast<int>(rows.size());
  for (int i = 0; i < m; ++i)
    for (int j = i + 1; j < m; ++j)
      for (int k = j + 1; k < m; ++k) {
        Eigen::Matrix3d mat;
        Eigen::Vector3d v;
        mat << rows[i][0], rows[i][1], rows[i][2], rows[j][0], rows[j][1], rows[j][2],
            rows[k][0], rows[k][1], rows[k][2];
        v << rhs[i], rhs[j], rhs[k];
        if (std::abs(mat.determinant()) < 1e-12) continue;
        Eigen::Vector3d x = mat.fullPivLu().solve(v);
        bool ok = true;
        for (int q = 0; q < n && ok; ++q) ok = x(q) >= -1e-9;
        for (size_t q = 0; q < a.size() && ok; ++q)
          ok = a[q][0] * x(0) + a[q][1] * x(1) + a[q][2] * x(2) <= b[q] + 1e-9;
        if (!ok) continue;
        best = std::max(best, c[0] * x(0) + c[1] * x(1) + c[2] * x(2));
      }
  return best;
}

}  // namespace

TEST_CASE("projected_ascent: concave quadratic with box projection") {
  Eigen::Vector3d target(1.7, -0.3, 0.5);
  optim::AscentOracle oracle;
  oracle.value = [&](const ComplexMatrix& w) {
    double s = 0.0;
    for (int i = 0; i < 3; ++i) s -= std::norm(w(i, 0) - target(i));
    return s;
  };
  oracle.gradient = [&](const ComplexMatrix& w) {
    ComplexMatrix g(3, 1);
    for (int i = 0; i < 3; ++i) g(i, 0) = target(i) - w(i, 0);
    return g;
  };
  oracle.project = [](const ComplexMatrix& w) {
    ComplexMatrix p(3, 1);
    for (int i = 0; i < 3; ++i)
      p(i, 0) = std::complex<double>(std::clamp(w(i, 0).real(), 0.0, 1.0), 0.0);
    return p;
  };
  optim::SolverOptions opts;
  opts.eps = 1e-10;
  opts.max_iters = 2000;
  ComplexMatrix init = ComplexMatrix::Constant(3, 1, 0.2);
  auto [w, trace] = optim::projected_ascent(oracle, init, opts);
  CHECK(std::abs(w(0, 0).real() - 1.0) <= 1e-6);
  CHECK(std::abs(w(1, 0).real() - 0.0) <= 1e-6);
  CHECK(std::abs(w(2, 0).real() - 0.5) <= 1e-6);
  for (size_t i = 1; i < trace.objective.size(); ++i)
    CHECK(trace.objective[i] >= trace.objective[i - 1] - 1e-12);

  // Starting at the optimum terminates immediately.
  ComplexMatrix opt(3, 1);
  opt << 1.0, 0.0, 0.5;
  auto [w2, trace2] = optim::projected_ascent(oracle, opt, opts);
  CHECK(trace2.iterations <= 2);
  CHECK((w2 - opt).norm() <= 1e-9);
}

TEST_CASE("projected_ascent rejects a non-finite objective at init") {
  optim::AscentOracle oracle;
  oracle.value = [](const ComplexMatrix&) { return std::nan(""); };
  oracle.gradient = [](const ComplexMatrix& w) { return w; };
  oracle.project = [](const ComplexMatrix& w) { return w; };
  CHECK_THROWS_AS(optim::projected_ascent(oracle, ComplexMatrix::Zero(2, 1), {}),
                  std::invalid_argument);
}

TEST_CASE("bisect_feasibility: step oracle, iteration count, random thresholds") {
  optim::SolveTrace trace;
  double t = optim::bisect_feasibility([](double x) { return x <= 5.0; }, 0.0, 10.0, 1e-4,
                                       false, &trace);
  CHECK(std::abs(t - 5.0) <= 1e-4);
  CHECK(trace.iterations == 17);  // ceil(log2(10 / 1e-4))

  Rng rng(2024);
  for (int rep = 0; rep < 20; ++rep) {
    double thresh = 10.0 * rng.uniform();
    double got = optim::bisect_feasibility([&](double x) { return x <= thresh; }, 0.0, 10.0,
                                           1e-6);
    CHECK(std::abs(got - thresh) <= 1e-6);
  }
  CHECK_THROWS_AS(
      optim::bisect_feasibility([](double x) { return x > 1.0; }, 0.0, 10.0, 1e-4),
      std::invalid_argument);
}

TEST_CASE("golden_line_search: unimodal, endpoints, multimodal vs dense grid") {
  double a = optim::golden_line_search([](double x) { return -(x - 0.3) * (x - 0.3); });
  CHECK(std::abs(a - 0.3) <= 1e-4);

  CHECK(optim::golden_line_search([](double x) { return x; }) == doctest::Approx(1.0));
  CHECK(optim::golden_line_search([](double x) { return -x; }) == doctest::Approx(0.0));

  auto wavy = [](double x) { return std::sin(7.0 * x) + 0.5 * std::cos(15.0 * x) + 0.2 * x; };
  double got = optim::golden_line_search(wavy);
  double dense = oracles::dense_grid_argmax(wavy, 10001);
  CHECK(std::abs(got - dense) <= 1e-3);
}

TEST_CASE("barrier_concave_max: log-det with a trace cap reproduces waterfilling") {
  optim::BlockProgram prog;
  prog.dims = {3};
  prog.logdet_weight = {1.0 / std::log(2.0)};
  ComplexMatrix g = ComplexMatrix::Zero(3, 3);
  g(0, 0) = 2.0;
  g(1, 1) = 1.0;
  g(2, 2) = 0.5;
  prog.logdet_factor = {g};
  optim::BlockProgram::Constraint cap;
  cap.A = {ComplexMatrix::Identity(3, 3)};
  cap.bound = 10.0;
  cap.upper = true;
  cap.scale = 10.0;
  prog.constraints.push_back(cap);

  optim::SolverOptions opts;
  opts.barrier_mu_min = 1e-11;
  auto sol = optim::barrier_concave_max(prog, {}, 0.0, opts);
  REQUIRE(sol.feasible_start_found);
  auto wf = oracles::waterfilling({4.0, 1.0, 0.25}, 10.0);
  CHECK(sol.objective == doctest::Approx(wf.objective).epsilon(1e-8));
  for (int i = 0; i < 3; ++i)
    CHECK(sol.blocks[0](i, i).real() == doctest::Approx(wf.power[i]).epsilon(1e-4));
  // Barrier stages never decrease the recorded objective.
  for (size_t i = 1; i < sol.trace.objective.size(); ++i)
    CHECK(sol.trace.objective[i] >= sol.trace.objective[i - 1] - 1e-9);
  CHECK(sol.kkt_residual <= 1e-6);
}

TEST_CASE("barrier_concave_max: linear objective lands on the vertex optimum") {
  optim::BlockProgram prog;
  prog.dims = {1, 1, 1};
  prog.logdet_weight = {0, 0, 0};
  prog.logdet_factor = {{}, {}, {}};
  prog.linear_coeff.resize(3);
  const std::vector<double> c = {5.0, 2.0, 1.0};
  for (int i = 0; i < 3; ++i) {
    prog.linear_coeff[i] = ComplexMatrix::Constant(1, 1, c[i]);
  }
  auto row = [&](std::vector<double> a, double b) {
    optim::BlockProgram::Constraint r;
    r.A.resize(3);
    for (int i = 0; i < 3; ++i) r.A[i] = ComplexMatrix::Constant(1, 1, a[i]);
    r.bound = b;
    r.upper = true;
    r.scale = std::max(1.0, b);
    prog.constraints.push_back(r);
  };
  row({1, 1, 1}, 5.0);
  row({2, 1, 0}, 4.0);

  optim::SolverOptions opts;
  opts.barrier_mu_min = 1e-10;
  auto sol = optim::barrier_concave_max(prog, {}, 0.0, opts);
  REQUIRE(sol.feasible_start_found);
  const double oracle = lp_vertex_max(c, {{1, 1, 1}, {2, 1, 0}}, {5.0, 4.0});
  CHECK(sol.objective == doctest::Approx(oracle).epsilon(1e-6));

  // Iterates stay feasible: final point satisfies every constraint.
  double l1 = sol.blocks[0](0, 0).real(), l2 = sol.blocks[1](0, 0).real(),
         l3 = sol.blocks[2](0, 0).real();
  CHECK(l1 >= -1e-12);
  CHECK(l2 >= -1e-12);
  CHECK(l3 >= -1e-12);
  CHECK(l1 + l2 + l3 <= 5.0 + 1e-9);
  CHECK(2 * l1 + l2 <= 4.0 + 1e-9);
}

TEST_CASE("barrier_concave_max reports an impossible scaling as infeasible") {
  optim::BlockProgram prog;
  prog.dims = {1};
  prog.logdet_weight = {0.0};
  prog.logdet_factor = {{}};
  prog.linear_coeff.resize(1);
  prog.linear_coeff[0] = ComplexMatrix::Constant(1, 1, 1.0);
  optim::BlockProgram::Constraint cap;  // x <= 1
  cap.A = {ComplexMatrix::Constant(1, 1, 1.0)};
  cap.bound = 1.0;
  cap.upper = true;
  prog.constraints.push_back(cap);
  optim::BlockProgram::Constraint floor;  // x >= 2, impossible under the cap
  floor.A = {ComplexMatrix::Constant(1, 1, 1.0)};
  floor.bound = 2.0;
  floor.upper = false;
  prog.constraints.push_back(floor);
  auto sol = optim::barrier_concave_max(prog, {}, 0.0, {});
  CHECK(!sol.feasible_start_found);
}
