#include <gtest/gtest.h>

#include <fstream>
#include <json.hpp>
#include <random>

#include "structdiag/error.hpp"
#include "structdiag/linres.hpp"
#include "testkit.hpp"

using namespace structdiag;
using testkit::eqs;
using testkit::sig;
using testkit::vars;

namespace {


std::vector<Rational> rats(std::initializer_list<int> v) {
  return std::vector<Rational>(v.begin(), v.end());
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

struct Eq2 {
  StructuralModel model = testkit::eq2_model();
  LinearStaticModel lin = parse_linear_model(slurp(testkit::eq2_path()), model);
};

Eigen::MatrixXd mat2(double a, double b, double c, double d) {
  Eigen::MatrixXd m(2, 2);
  m << a, b, c, d;
  return m;
}

double quad(const Eigen::MatrixXd& c, const std::vector<double>& w) {
  Eigen::VectorXd v = Eigen::Map<const Eigen::VectorXd>(w.data(), static_cast<Eigen::Index>(w.size()));
  return v.dot(c * v);
}

// Coarse-to-fine grid over (w1, w2) with w3 = 1 - w1 - w2.
std::vector<double> grid_weights(const Eigen::MatrixXd& c) {
  double c1 = 0.5, c2 = 0.5, step = 0.05, half = 3.0;
  while (step > 1e-9) {
    double best = std::numeric_limits<double>::infinity(), b1 = c1, b2 = c2;
    for (double w1 = c1 - half; w1 <= c1 + half + 1e-15; w1 += step)
      for (double w2 = c2 - half; w2 <= c2 + half + 1e-15; w2 += step) {
        const double v = quad(c, {w1, w2, 1 - w1 - w2});
        if (v < best) best = v, b1 = w1, b2 = w2;
      }
    c1 = b1, c2 = b2;
    half = 3 * step;
    step /= 5;
  }
  return {c1, c2, 1 - c1 - c2};
}

}  // namespace

TEST(ParseRational, Forms) {
  EXPECT_EQ(parse_rational("3"), Rational(3));
  EXPECT_EQ(parse_rational("-1/2"), Rational(-1, 2));
  EXPECT_EQ(parse_rational("0.25"), Rational(1, 4));
  EXPECT_EQ(parse_rational("1e-3"), Rational(1, 1000));
  EXPECT_EQ(parse_rational("-2.5E2"), Rational(-250));
  for (const char* bad : {"", "1/0", "abc", "1.2.3", "1e", "--1"})
    EXPECT_THROW(parse_rational(bad), InputError) << bad;
}

TEST(DeriveResidual, Eq2FirstResidual) {
  Eq2 e;
  const auto order = computation_order(e.model, eqs({"e1", "e2", "e5"}));
  const auto r = derive_residual_exact(e.lin, order, "e1");
  // known ids: u1 u2 y1 y2 y3; r = -u1 + u2 + y3 = f2 + v1 - v2 + v5
  EXPECT_EQ(r.known_gains, rats({-1, 1, 0, 0, 1}));
  EXPECT_EQ(r.fault_gains, rats({0, 1}));
  EXPECT_EQ(r.noise_gains, rats({1, -1, 0, 0, 1}));
  const auto d = derive_residual(e.lin, order);
  EXPECT_DOUBLE_EQ(d.variance, 3.0);
  EXPECT_DOUBLE_EQ(d.fault_gain("f2"), 1.0);
  EXPECT_THROW(d.fault_gain("f9"), UnknownIdError);
}

TEST(DeriveResidual, Eq2SecondResidual) {
  Eq2 e;
  const auto r = derive_residual(e.lin, computation_order(e.model, eqs({"e1", "e3", "e5"})));
  EXPECT_EQ(r.fault_gains, (std::vector<double>{0, 1}));
  EXPECT_EQ(r.known_gains, (std::vector<double>{1, 0, -1, 0, 1}));
  EXPECT_NEAR(r.variance, 3.0, 1e-12);
}

TEST(DeriveResidual, DuplicateConstraintCancels) {
  const std::string text = R"({
    "unknowns": ["x"], "knowns": ["y"], "faults": [],
    "equations": [{"id": "e1", "unknowns": ["x"], "knowns": ["y"]},
                  {"id": "e2", "unknowns": ["x"], "knowns": ["y"]}],
    "linear": {"noise": [], "equations": {
      "e1": {"unknowns": {"x": 1}, "knowns": {"y": -1}},
      "e2": {"unknowns": {"x": 1}, "knowns": {"y": -1}}}}})";
  const auto m = parse_model(text);
  const auto lin = parse_linear_model(text, m);
  const auto r = derive_residual_exact(lin, computation_order(m, m.all_equations()), "e1");
  EXPECT_EQ(r.known_gains, rats({0}));
  EXPECT_TRUE(r.fault_gains.empty());
  EXPECT_TRUE(r.noise_gains.empty());
}

TEST(DeriveResidual, Errors) {
  Eq2 e;
  const auto order = computation_order(e.model, eqs({"e1", "e2", "e3", "e5"}));
  EXPECT_THROW(derive_residual(e.lin, order), PreconditionError);
  EXPECT_NO_THROW(derive_residual(e.lin, order, "e1"));
  EXPECT_THROW(derive_residual(e.lin, order, "e5"), PreconditionError);

  ComputationOrder bad;
  bad.pivots = {{"e2", "x1"}};
  bad.residual_equations = eqs({"e1"});
  EXPECT_THROW(derive_residual(e.lin, bad, "e1"), PreconditionError);

  // A zero coefficient on a structural incidence contradicts the structure.
  const std::string text = R"({
    "unknowns": ["x"], "knowns": ["y"], "faults": [],
    "equations": [{"id": "e1", "unknowns": ["x"], "knowns": ["y"]},
                  {"id": "e2", "unknowns": ["x"], "knowns": ["y"]}],
    "linear": {"noise": [], "equations": {
      "e1": {"unknowns": {"x": 1}, "knowns": {"y": -1}},
      "e2": {"unknowns": {"x": "0"}, "knowns": {"y": -1}}}}})";
  const auto m = parse_model(text);
  EXPECT_THROW(parse_linear_model(text, m), InputError);
}

TEST(LinearModel, ValidationErrors) {
  const auto m = testkit::eq2_model();
  auto doc = nlohmann::json::parse(slurp(testkit::eq2_path()));
  auto expect_reject = [&](nlohmann::json d, const std::string& needle) {
    try {
      parse_linear_model(d.dump(), m);
      ADD_FAILURE() << "accepted; expected " << needle;
    } catch (const InputError& e) {
      EXPECT_NE(std::string(e.what()).find(needle), std::string::npos) << e.what();
    }
  };
  auto d = doc;
  d["linear"]["noise_cov"][0][1] = 0.5;
  expect_reject(d, "not symmetric");
  d = doc;
  d["linear"]["noise_cov"][0][0] = -1;
  expect_reject(d, "positive semidefinite");
  d = doc;
  d["linear"]["equations"]["e5"]["unknowns"]["x1"] = 1;
  expect_reject(d, "e5");
  d = doc;
  d["linear"]["equations"].erase("e3");
  expect_reject(d, "e3");
  d = doc;
  d["linear"]["equations"]["e1"]["noise"]["v9"] = 1;
  expect_reject(d, "v9");
  d = doc;
  d.erase("linear");
  expect_reject(d, "no \"linear\" block");

  d = doc;
  d["linear"].erase("noise_cov");
  EXPECT_EQ(parse_linear_model(d.dump(), m).noise_cov(), Eigen::MatrixXd::Identity(5, 5));

  EXPECT_THROW(parse_linear_model(slurp(testkit::eq4_path()), testkit::eq4_model()), InputError);
}

TEST(Fusion, ClosedFormTwoResiduals) {
  const auto w = min_variance_weights(mat2(3, -1, -1, 3));
  EXPECT_NEAR(w.weights[0], 0.5, 1e-12);
  EXPECT_NEAR(w.weights[1], 0.5, 1e-12);
  EXPECT_NEAR(w.variance, 1.0, 1e-12);
}

TEST(Fusion, IndependentEqualVariances) {
  for (double s2 : {0.1, 1.0, 7.0}) {
    const auto w = min_variance_weights(mat2(s2, 0, 0, s2));
    EXPECT_NEAR(w.weights[0], 0.5, 1e-12);
    EXPECT_NEAR(w.variance, s2 / 2, 1e-12);
  }
}

TEST(Fusion, Errors) {
  EXPECT_THROW(min_variance_weights(mat2(1, 1, 1, 1)), NumericError);
  EXPECT_THROW(min_variance_weights(mat2(1, 0.5, 0, 1)), NumericError);
  EXPECT_THROW(min_variance_weights(Eigen::MatrixXd(2, 3)), PreconditionError);
  Eq2 e;
  const auto r1 = derive_residual(e.lin, computation_order(e.model, eqs({"e1", "e2", "e5"})));
  EXPECT_THROW(min_variance_fusion({r1}, "f2", e.lin.noise_cov()), PreconditionError);
  auto scaled = r1;
  for (auto& g : scaled.fault_gains) g *= 2;
  EXPECT_THROW(min_variance_fusion({r1, scaled}, "f2", e.lin.noise_cov()), PreconditionError);
  EXPECT_THROW(min_variance_fusion({r1, r1}, "f2", Eigen::MatrixXd::Identity(3, 3)),
               PreconditionError);
}

TEST(Fusion, Eq2EndToEnd) {
  Eq2 e;
  const auto r1 = derive_residual(e.lin, computation_order(e.model, eqs({"e1", "e2", "e5"})));
  const auto r2 = derive_residual(e.lin, computation_order(e.model, eqs({"e1", "e3", "e5"})));
  const auto f = min_variance_fusion({r1, r2}, "f2", e.lin.noise_cov());
  EXPECT_NEAR(f.residual_cov(0, 0), 3.0, 1e-12);
  EXPECT_NEAR(f.residual_cov(1, 1), 3.0, 1e-12);
  // The worked example quotes -1 here; the model data gives 0.
  EXPECT_NEAR(f.residual_cov(0, 1), 0.0, 1e-12);
  EXPECT_LT(f.variance, 3.0);
  EXPECT_NEAR(f.fused.fault_gain("f2"), 1.0, 1e-12);
  EXPECT_NEAR(f.fused.fault_gain("f1"), 0.0, 1e-12);
  const Eigen::Map<const Eigen::VectorXd> n(f.fused.noise_gains.data(), 5);
  EXPECT_NEAR(n.dot(e.lin.noise_cov() * n), f.variance, 1e-12);
}

TEST(FusionProperties, GridSearchOracleOnRandom3x3) {
  std::mt19937_64 rng(51);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int i = 0; i < 25; ++i) {
    Eigen::MatrixXd b(3, 3);
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) b(r, c) = u(rng);
    const Eigen::MatrixXd c = b * b.transpose() + 0.5 * Eigen::MatrixXd::Identity(3, 3);
    const auto w = min_variance_weights(c);
    const auto g = grid_weights(c);
    for (int k = 0; k < 3; ++k) EXPECT_NEAR(w.weights[k], g[k], 1e-6);
    EXPECT_NEAR(w.variance, quad(c, w.weights), 1e-12);
  }
}

TEST(FusionProperties, OptimalityAndBound) {
  std::mt19937_64 rng(52);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int i = 0; i < 200; ++i) {
    const int n = 2 + static_cast<int>(rng() % 4);
    Eigen::MatrixXd b(n, n);
    for (int r = 0; r < n; ++r)
      for (int c = 0; c < n; ++c) b(r, c) = u(rng);
    const Eigen::MatrixXd c = b * b.transpose() + 0.1 * Eigen::MatrixXd::Identity(n, n);
    const auto w = min_variance_weights(c);
    double sum = 0;
    for (double x : w.weights) sum += x;
    EXPECT_NEAR(sum, 1.0, 1e-12);
    EXPECT_LE(w.variance, c.diagonal().minCoeff() * (1 + 1e-12));
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        if (j == k) continue;
        for (double h : {1e-6, -1e-6}) {
          auto p = w.weights;
          p[j] += h;
          p[k] -= h;
          EXPECT_GE(quad(c, p), w.variance - 1e-10);
        }
      }
  }
}

// Two unknowns, three equations: the residual is the left null combination
// of the unknown coefficient rows (a cross product), computed exactly.
TEST(ResidualProperties, MatchesHandElimination) {
  std::mt19937_64 rng(53);
  std::uniform_int_distribution<int> coef(-5, 5);
  auto nonzero = [&] {
    int c = 0;
    while (c == 0) c = coef(rng);
    return Rational(c, 1 + static_cast<int>(rng() % 3));
  };
  int checked = 0;
  for (int i = 0; i < 200; ++i) {
    const int single = static_cast<int>(rng() % 3);  // equation with one unknown
    const int which = static_cast<int>(rng() % 2);
    const int faulty = static_cast<int>(rng() % 3);
    Rational a[3][2], k[3][3], n[3][3], f[3];
    nlohmann::json doc = {{"unknowns", {"x1", "x2"}}, {"knowns", {"y0", "y1", "y2"}},
                          {"faults", {"f"}}, {"equations", nlohmann::json::array()}};
    nlohmann::json lin = {{"noise", {"v0", "v1", "v2"}}, {"equations", nlohmann::json::object()}};
    for (int e = 0; e < 3; ++e) {
      nlohmann::json eq = {{"id", "e" + std::to_string(e)}, {"knowns", nlohmann::json::array()}};
      nlohmann::json le = {{"unknowns", nlohmann::json::object()}, {"knowns", nlohmann::json::object()},
                           {"noise", nlohmann::json::object()}};
      for (int x = 0; x < 2; ++x) {
        a[e][x] = (e == single && x != which) ? Rational(0) : nonzero();
        if (a[e][x] != 0) {
          eq["unknowns"].push_back("x" + std::to_string(x + 1));
          le["unknowns"]["x" + std::to_string(x + 1)] = a[e][x].str();
        }
      }
      for (int j = 0; j < 3; ++j) {
        k[e][j] = (j == e || coef(rng) > 2) ? nonzero() : Rational(0);
        n[e][j] = (j == e) ? nonzero() : Rational(0);
        if (k[e][j] != 0) {
          eq["knowns"].push_back("y" + std::to_string(j));
          le["knowns"]["y" + std::to_string(j)] = k[e][j].str();
        }
        if (n[e][j] != 0) le["noise"]["v" + std::to_string(j)] = n[e][j].str();
      }
      f[e] = (e == faulty) ? nonzero() : Rational(0);
      if (f[e] != 0) {
        eq["faults"] = {"f"};
        le["faults"] = {{"f", f[e].str()}};
      }
      doc["equations"].push_back(eq);
      lin["equations"]["e" + std::to_string(e)] = le;
    }
    doc["linear"] = lin;
    const auto text = doc.dump();
    const auto m = parse_model(text);
    const auto lm = parse_linear_model(text, m);
    const auto order = computation_order(m, m.all_equations());
    ASSERT_EQ(order.residual_equations.size(), 1u);
    const auto r = derive_residual_exact(lm, order, *order.residual_equations.begin());

    const Rational lambda[3] = {a[1][0] * a[2][1] - a[2][0] * a[1][1],
                                a[2][0] * a[0][1] - a[0][0] * a[2][1],
                                a[0][0] * a[1][1] - a[1][0] * a[0][1]};
    std::vector<Rational> expect;  // known, fault, noise
    for (int j = 0; j < 3; ++j) expect.push_back(lambda[0] * k[0][j] + lambda[1] * k[1][j] + lambda[2] * k[2][j]);
    expect.push_back(-(lambda[0] * f[0] + lambda[1] * f[1] + lambda[2] * f[2]));
    for (int j = 0; j < 3; ++j) expect.push_back(-(lambda[0] * n[0][j] + lambda[1] * n[1][j] + lambda[2] * n[2][j]));
    std::vector<Rational> got = r.known_gains;
    got.insert(got.end(), r.fault_gains.begin(), r.fault_gains.end());
    got.insert(got.end(), r.noise_gains.begin(), r.noise_gains.end());
    ASSERT_EQ(got.size(), expect.size());

    // got = s * expect for a single nonzero s.
    std::optional<Rational> s;
    for (std::size_t j = 0; j < got.size(); ++j) {
      if (expect[j] == 0) {
        EXPECT_EQ(got[j], 0);
        continue;
      }
      if (!s) s = got[j] / expect[j];
      EXPECT_EQ(got[j], *s * expect[j]);
    }
    if (s) {
      EXPECT_NE(*s, 0);
      ++checked;
    }
    if (expect[3] != 0) EXPECT_EQ(r.fault_gains[0], 1);
  }
  EXPECT_GT(checked, 150);
}
