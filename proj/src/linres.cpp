#include "structdiag/linres.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <json.hpp>

#include "structdiag/error.hpp"

namespace structdiag {

namespace {

using nlohmann::json;
using boost::multiprecision::cpp_int;

constexpr double kSymmetryTol = 1e-12;

cpp_int pow10(long e) {
  cpp_int p = 1;
  for (long i = 0; i < e; ++i) p *= 10;
  return p;
}

Rational coefficient(const json& v, const std::string& path) {
  try {
    if (v.is_number_integer()) return Rational(v.get<long long>());
    if (v.is_number_unsigned()) return Rational(v.get<unsigned long long>());
    if (v.is_number_float()) return parse_rational(v.dump());
    if (v.is_string()) return parse_rational(v.get<std::string>());
  } catch (const InputError& e) {
    throw InputError(path + ": " + e.what());
  }
  throw InputError(path + ": expected a number or a rational string");
}

std::map<std::string, Rational> coefficient_map(const json& obj, const char* key,
                                                const std::string& path) {
  std::map<std::string, Rational> out;
  auto it = obj.find(key);
  if (it == obj.end()) return out;
  if (!it->is_object()) throw InputError(path + "." + key + ": expected an object");
  for (const auto& [id, value] : it->items()) {
    Rational c = coefficient(value, path + "." + key + "." + id);
    if (c != 0) out.emplace(id, c);
  }
  return out;
}

double to_double(const Rational& r) { return r.convert_to<double>(); }

std::vector<double> to_doubles(const std::vector<Rational>& v) {
  std::vector<double> out;
  out.reserve(v.size());
  for (const auto& r : v) out.push_back(to_double(r));
  return out;
}

// Linear form over knowns, faults and noise, indexed like LinearStaticModel.
struct Form {
  std::vector<Rational> known, fault, noise;

  Form(std::size_t nk, std::size_t nf, std::size_t nn) : known(nk), fault(nf), noise(nn) {}

  void add_scaled(const Form& other, const Rational& s) {
    for (std::size_t i = 0; i < known.size(); ++i) known[i] += s * other.known[i];
    for (std::size_t i = 0; i < fault.size(); ++i) fault[i] += s * other.fault[i];
    for (std::size_t i = 0; i < noise.size(); ++i) noise[i] += s * other.noise[i];
  }
};

std::size_t index_of(const std::vector<std::string>& ids, const std::string& id) {
  return static_cast<std::size_t>(std::find(ids.begin(), ids.end(), id) - ids.begin());
}

Form constant_part(const LinearStaticModel& lin, const LinearEquation& eq) {
  Form f(lin.known_ids().size(), lin.fault_ids().size(), lin.noise_ids().size());
  for (const auto& [id, c] : eq.knowns) f.known[index_of(lin.known_ids(), id)] = c;
  for (const auto& [id, c] : eq.faults) f.fault[index_of(lin.fault_ids(), id)] = c;
  for (const auto& [id, c] : eq.noise) f.noise[index_of(lin.noise_ids(), id)] = c;
  return f;
}

}  // namespace

Rational parse_rational(std::string_view text) {
  std::string s(text);
  s.erase(std::remove_if(s.begin(), s.end(), [](char c) { return c == ' '; }), s.end());
  if (s.empty()) throw InputError("empty coefficient");
  if (auto slash = s.find('/'); slash != std::string::npos) {
    Rational num = parse_rational(s.substr(0, slash));
    Rational den = parse_rational(s.substr(slash + 1));
    if (den == 0) throw InputError("zero denominator in '" + s + "'");
    return num / den;
  }
  std::size_t pos = 0;
  bool negative = false;
  if (s[pos] == '+' || s[pos] == '-') negative = s[pos++] == '-';
  cpp_int digits = 0;
  long scale = 0;
  bool any_digit = false, in_fraction = false;
  for (; pos < s.size(); ++pos) {
    char c = s[pos];
    if (c >= '0' && c <= '9') {
      digits = digits * 10 + (c - '0');
      any_digit = true;
      if (in_fraction) ++scale;
    } else if (c == '.' && !in_fraction) {
      in_fraction = true;
    } else {
      break;
    }
  }
  if (!any_digit) throw InputError("malformed coefficient '" + s + "'");
  long exponent = 0;
  if (pos < s.size()) {
    if (s[pos] != 'e' && s[pos] != 'E') throw InputError("malformed coefficient '" + s + "'");
    std::string exp = s.substr(pos + 1);
    std::size_t used = 0;
    try {
      exponent = std::stol(exp, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != exp.size() || std::labs(exponent) > 4096)
      throw InputError("malformed coefficient '" + s + "'");
  }
  exponent -= scale;
  Rational out = exponent >= 0 ? Rational(digits * pow10(exponent))
                               : Rational(digits, pow10(-exponent));
  return negative ? Rational(-out) : out;
}

LinearStaticModel::LinearStaticModel(const StructuralModel& structure,
                                     std::map<std::string, LinearEquation> equations,
                                     std::vector<std::string> noise_ids,
                                     Eigen::MatrixXd noise_cov)
    : known_ids_(structure.known_ids()),
      fault_ids_(structure.fault_ids()),
      noise_ids_(std::move(noise_ids)),
      noise_cov_(std::move(noise_cov)) {
  std::sort(known_ids_.begin(), known_ids_.end());
  std::sort(fault_ids_.begin(), fault_ids_.end());
  std::set<std::string> noise_seen;
  for (const auto& v : noise_ids_) {
    if (v.empty() || !noise_seen.insert(v).second)
      throw InputError("empty or duplicate noise id '" + v + "'");
  }

  for (const auto& eq : structure.equations()) {
    if (eq.is_differential())
      throw InputError("linear residuals need a static model; '" + eq.id +
                       "' is differential");
    auto it = equations.find(eq.id);
    if (it == equations.end())
      throw InputError("linear block has no coefficients for equation '" + eq.id + "'");
    const LinearEquation& lin = it->second;

    std::set<std::string> unknowns;
    for (const auto& inc : eq.incidences) unknowns.insert(inc.variable);
    std::set<std::string> lin_unknowns;
    for (const auto& [id, c] : lin.unknowns) lin_unknowns.insert(id);
    if (unknowns != lin_unknowns)
      throw InputError("equation '" + eq.id +
                       "': nonzero unknown coefficients do not match its structure");

    std::set<std::string> faults(eq.faults.begin(), eq.faults.end());
    std::set<std::string> lin_faults;
    for (const auto& [id, c] : lin.faults) lin_faults.insert(id);
    if (faults != lin_faults)
      throw InputError("equation '" + eq.id +
                       "': nonzero fault coefficients do not match its structure");

    for (const auto& [id, c] : lin.knowns) {
      if (std::find(eq.knowns.begin(), eq.knowns.end(), id) == eq.knowns.end())
        throw InputError("equation '" + eq.id + "': known '" + id +
                         "' is not declared on the equation");
    }
    for (const auto& [id, c] : lin.noise) {
      if (!noise_seen.count(id))
        throw InputError("equation '" + eq.id + "': undeclared noise term '" + id + "'");
    }
  }
  for (const auto& [id, lin] : equations) {
    if (!structure.has_equation(id))
      throw InputError("linear block names unknown equation '" + id + "'");
  }
  equations_.insert(equations.begin(), equations.end());

  const auto n = static_cast<Eigen::Index>(noise_ids_.size());
  if (noise_cov_.rows() != n || noise_cov_.cols() != n)
    throw InputError("noise_cov must be " + std::to_string(n) + "x" + std::to_string(n));
  if (n > 0) {
    if ((noise_cov_ - noise_cov_.transpose()).cwiseAbs().maxCoeff() > kSymmetryTol)
      throw InputError("noise_cov is not symmetric");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(noise_cov_);
    if (eig.eigenvalues().minCoeff() < -1e-10)
      throw InputError("noise_cov is not positive semidefinite");
  }
}

const LinearEquation& LinearStaticModel::equation(std::string_view id) const {
  auto it = equations_.find(id);
  if (it == equations_.end())
    throw UnknownIdError("no linear equation '" + std::string(id) + "'");
  return it->second;
}

LinearStaticModel parse_linear_model(std::string_view text, const StructuralModel& structure) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw InputError(std::string("malformed model file: ") + e.what());
  }
  auto block = doc.find("linear");
  if (block == doc.end()) throw InputError("model file has no \"linear\" block");
  if (!block->is_object()) throw InputError("$.linear: expected an object");

  std::vector<std::string> noise;
  if (auto it = block->find("noise"); it != block->end()) {
    if (!it->is_array()) throw InputError("$.linear.noise: expected an array");
    for (const auto& v : *it) {
      if (!v.is_string()) throw InputError("$.linear.noise: expected strings");
      noise.push_back(v.get<std::string>());
    }
  }
  const auto n = static_cast<Eigen::Index>(noise.size());
  Eigen::MatrixXd cov = Eigen::MatrixXd::Identity(n, n);
  if (auto it = block->find("noise_cov"); it != block->end()) {
    if (!it->is_array() || static_cast<Eigen::Index>(it->size()) != n)
      throw InputError("$.linear.noise_cov: expected " + std::to_string(n) + " rows");
    for (Eigen::Index i = 0; i < n; ++i) {
      const json& row = (*it)[static_cast<std::size_t>(i)];
      if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != n)
        throw InputError("$.linear.noise_cov: row " + std::to_string(i) + " has wrong length");
      for (Eigen::Index j = 0; j < n; ++j) {
        const std::string path = "$.linear.noise_cov[" + std::to_string(i) + "][" +
                                 std::to_string(j) + "]";
        cov(i, j) = to_double(coefficient(row[static_cast<std::size_t>(j)], path));
      }
    }
  }

  std::map<std::string, LinearEquation> equations;
  auto eqs = block->find("equations");
  if (eqs == block->end() || !eqs->is_object())
    throw InputError("$.linear.equations: expected an object");
  for (const auto& [id, body] : eqs->items()) {
    const std::string path = "$.linear.equations." + id;
    if (!body.is_object()) throw InputError(path + ": expected an object");
    LinearEquation eq;
    eq.unknowns = coefficient_map(body, "unknowns", path);
    eq.knowns = coefficient_map(body, "knowns", path);
    eq.faults = coefficient_map(body, "faults", path);
    eq.noise = coefficient_map(body, "noise", path);
    equations.emplace(id, std::move(eq));
  }
  return LinearStaticModel(structure, std::move(equations), std::move(noise), std::move(cov));
}

double LinearResidual::fault_gain(std::string_view fault) const {
  for (std::size_t i = 0; i < fault_ids.size(); ++i)
    if (fault_ids[i] == fault) return fault_gains[i];
  throw UnknownIdError("unknown fault id '" + std::string(fault) + "'");
}

ExactResidual derive_residual_exact(const LinearStaticModel& lin,
                                    const ComputationOrder& order,
                                    std::string_view residual_equation) {
  const std::size_t nk = lin.known_ids().size(), nf = lin.fault_ids().size(),
                    nn = lin.noise_ids().size();
  if (!order.residual_equations.contains(residual_equation))
    throw PreconditionError("'" + std::string(residual_equation) +
                            "' is not a residual equation of the computation order");
  // Each solved unknown as a linear form: x = form.
  std::map<std::string, Form> solved;
  for (const auto& [eq_id, unknown] : order.pivots) {
    const LinearEquation& eq = lin.equation(eq_id);
    auto pivot = eq.unknowns.find(unknown);
    if (pivot == eq.unknowns.end() || pivot->second == 0)
      throw NumericError("structurally valid but numerically singular step: zero coefficient of '" +
                         unknown + "' in '" + eq_id + "'");
    // a*x + sum(b_y*y) + rest = 0  =>  x = -(rest + sum(b_y*form_y)) / a
    Form rhs = constant_part(lin, eq);
    for (const auto& [other, c] : eq.unknowns) {
      if (other == unknown) continue;
      auto it = solved.find(other);
      if (it == solved.end())
        throw PreconditionError("computation order uses '" + other + "' in '" + eq_id +
                                "' before it is computed");
      rhs.add_scaled(it->second, c);
    }
    Form x(nk, nf, nn);
    x.add_scaled(rhs, Rational(-1) / pivot->second);
    solved.emplace(unknown, std::move(x));
  }

  const LinearEquation& res = lin.equation(residual_equation);
  Form total = constant_part(lin, res);
  for (const auto& [other, c] : res.unknowns) {
    auto it = solved.find(other);
    if (it == solved.end())
      throw PreconditionError("residual equation '" + std::string(residual_equation) +
                              "' contains uncomputed unknown '" + other + "'");
    total.add_scaled(it->second, c);
  }

  // total: K.z + F.f + N.v = 0, and the residual r = K.z equals -(F.f + N.v).
  ExactResidual out;
  out.known_gains = total.known;
  for (auto& g : total.fault) out.fault_gains.push_back(-g);
  for (auto& g : total.noise) out.noise_gains.push_back(-g);

  auto first = std::find_if(out.fault_gains.begin(), out.fault_gains.end(),
                            [](const Rational& g) { return g != 0; });
  if (first != out.fault_gains.end()) {
    const Rational scale = *first;
    for (auto* v : {&out.known_gains, &out.fault_gains, &out.noise_gains})
      for (auto& g : *v) g /= scale;
  }
  return out;
}

LinearResidual derive_residual(const LinearStaticModel& lin, const ComputationOrder& order,
                               std::string_view residual_equation) {
  const ExactResidual exact = derive_residual_exact(lin, order, residual_equation);
  LinearResidual r;
  r.known_ids = lin.known_ids();
  r.fault_ids = lin.fault_ids();
  r.noise_ids = lin.noise_ids();
  r.known_gains = to_doubles(exact.known_gains);
  r.fault_gains = to_doubles(exact.fault_gains);
  r.noise_gains = to_doubles(exact.noise_gains);
  if (!r.noise_gains.empty()) {
    const Eigen::Map<const Eigen::VectorXd> n(r.noise_gains.data(),
                                              static_cast<Eigen::Index>(r.noise_gains.size()));
    r.variance = n.dot(lin.noise_cov() * n);
  }
  return r;
}

LinearResidual derive_residual(const LinearStaticModel& lin, const ComputationOrder& order) {
  if (order.residual_equations.size() != 1)
    throw PreconditionError("computation order leaves " +
                            std::to_string(order.residual_equations.size()) +
                            " residual equations; name the one to use");
  return derive_residual(lin, order, order.residual_equations.members().front());
}

WeightSolution min_variance_weights(const Eigen::MatrixXd& c) {
  const Eigen::Index n = c.rows();
  if (n < 1 || c.cols() != n) throw PreconditionError("residual covariance must be square");
  if ((c - c.transpose()).cwiseAbs().maxCoeff() > kSymmetryTol)
    throw NumericError("residual covariance is not symmetric");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(c);
  const double largest = std::max(1.0, eig.eigenvalues().cwiseAbs().maxCoeff());
  if (eig.eigenvalues().minCoeff() <= 1e-12 * largest)
    throw NumericError("singular residual covariance");

  WeightSolution out;
  if (n == 2) {
    const double s11 = c(0, 0), s22 = c(1, 1), s12 = c(0, 1);
    const double k = (s22 - s12) / (s11 + s22 - 2 * s12);
    out.weights = {k, 1 - k};
    out.variance = k * k * s11 + 2 * k * (1 - k) * s12 + (1 - k) * (1 - k) * s22;
    return out;
  }
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(n);
  const Eigen::VectorXd a = c.ldlt().solve(ones);
  const double denom = ones.dot(a);
  const Eigen::VectorXd w = a / denom;
  out.weights.assign(w.data(), w.data() + n);
  out.variance = w.dot(c * w);
  return out;
}

Eigen::MatrixXd residual_covariance(const std::vector<LinearResidual>& residuals,
                                    const Eigen::MatrixXd& noise_cov) {
  const auto n = static_cast<Eigen::Index>(residuals.size());
  if (n == 0) return Eigen::MatrixXd(0, 0);
  const auto m = static_cast<Eigen::Index>(residuals.front().noise_gains.size());
  if (noise_cov.rows() != m || noise_cov.cols() != m)
    throw PreconditionError("noise covariance does not match the residual noise terms");
  Eigen::MatrixXd g(m, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const auto& ng = residuals[static_cast<std::size_t>(j)].noise_gains;
    if (static_cast<Eigen::Index>(ng.size()) != m)
      throw PreconditionError("residuals disagree on noise terms");
    for (Eigen::Index i = 0; i < m; ++i) g(i, j) = ng[static_cast<std::size_t>(i)];
  }
  return g.transpose() * noise_cov * g;
}

FusionResult min_variance_fusion(const std::vector<LinearResidual>& residuals,
                                 std::string_view target_fault,
                                 const Eigen::MatrixXd& noise_cov) {
  if (residuals.size() < 2) throw PreconditionError("fusion needs at least two residuals");
  const LinearResidual& first = residuals.front();
  for (const auto& r : residuals) {
    if (r.known_ids != first.known_ids || r.fault_ids != first.fault_ids ||
        r.noise_ids != first.noise_ids)
      throw PreconditionError("residuals are defined over different signals");
    if (std::abs(r.fault_gain(target_fault) - 1.0) > 1e-12)
      throw PreconditionError("mismatched fault normalization: gain on '" +
                              std::string(target_fault) + "' is not 1");
  }

  FusionResult out;
  out.residual_cov = residual_covariance(residuals, noise_cov);
  const WeightSolution ws = min_variance_weights(out.residual_cov);
  out.weights = ws.weights;
  out.variance = ws.variance;

  LinearResidual fused;
  fused.known_ids = first.known_ids;
  fused.fault_ids = first.fault_ids;
  fused.noise_ids = first.noise_ids;
  fused.known_gains.assign(first.known_gains.size(), 0.0);
  fused.fault_gains.assign(first.fault_gains.size(), 0.0);
  fused.noise_gains.assign(first.noise_gains.size(), 0.0);
  for (std::size_t j = 0; j < residuals.size(); ++j) {
    const double w = out.weights[j];
    for (std::size_t i = 0; i < fused.known_gains.size(); ++i)
      fused.known_gains[i] += w * residuals[j].known_gains[i];
    for (std::size_t i = 0; i < fused.fault_gains.size(); ++i)
      fused.fault_gains[i] += w * residuals[j].fault_gains[i];
    for (std::size_t i = 0; i < fused.noise_gains.size(); ++i)
      fused.noise_gains[i] += w * residuals[j].noise_gains[i];
  }
  fused.variance = ws.variance;
  out.fused = std::move(fused);
  return out;
}

}  // namespace structdiag
