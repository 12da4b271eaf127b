#include "dnrom/polynomial_model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <random>
#include <sstream>

#include "dnrom/errors.hpp"

namespace dnrom {

namespace {

int multiplicity(int r, int s) { return r == s ? 1 : 2; }

int multiplicity(int r, int s, int t) {
  if (r == s && s == t) return 1;
  if (r == s || s == t || r == t) return 3;
  return 6;
}

}  // namespace

PolynomialForce::PolynomialForce(int n, std::vector<Quadratic> quadratic, std::vector<Cubic> cubic)
    : n_(n), quadratic_(std::move(quadratic)), cubic_(std::move(cubic)) {
  for (auto& q : quadratic_) {
    if (q.r > q.s) std::swap(q.r, q.s);
    if (q.p < 0 || q.p >= n || q.r < 0 || q.s >= n)
      throw ValidationError("quadratic coefficient index out of range");
  }
  for (auto& c : cubic_) {
    std::array<int, 3> idx = {c.r, c.s, c.t};
    std::sort(idx.begin(), idx.end());
    c.r = idx[0], c.s = idx[1], c.t = idx[2];
    if (c.p < 0 || c.p >= n || c.r < 0 || c.t >= n)
      throw ValidationError("cubic coefficient index out of range");
  }
}

Vector PolynomialForce::evaluate(const Vector& x) const {
  if (x.size() != n_) throw ValidationError("displacement size mismatch");
  Vector f = Vector::Zero(n_);
  for (const auto& q : quadratic_) f[q.p] += q.coefficient * x[q.r] * x[q.s];
  for (const auto& c : cubic_) f[c.p] += c.coefficient * x[c.r] * x[c.s] * x[c.t];
  return f;
}

Matrix PolynomialForce::tangent(const Vector& x) const {
  if (x.size() != n_) throw ValidationError("displacement size mismatch");
  Matrix j = Matrix::Zero(n_, n_);
  for (const auto& q : quadratic_) {
    j(q.p, q.r) += q.coefficient * x[q.s];
    j(q.p, q.s) += q.coefficient * x[q.r];
  }
  for (const auto& c : cubic_) {
    j(c.p, c.r) += c.coefficient * x[c.s] * x[c.t];
    j(c.p, c.s) += c.coefficient * x[c.r] * x[c.t];
    j(c.p, c.t) += c.coefficient * x[c.r] * x[c.s];
  }
  return j;
}

double PolynomialForce::g(int p, int r, int s) const {
  if (r > s) std::swap(r, s);
  double v = 0.0;
  for (const auto& q : quadratic_)
    if (q.p == p && q.r == r && q.s == s) v += q.coefficient;
  return v / multiplicity(r, s);
}

double PolynomialForce::h(int p, int r, int s, int t) const {
  std::array<int, 3> idx = {r, s, t};
  std::sort(idx.begin(), idx.end());
  double v = 0.0;
  for (const auto& c : cubic_)
    if (c.p == p && c.r == idx[0] && c.s == idx[1] && c.t == idx[2]) v += c.coefficient;
  return v / multiplicity(idx[0], idx[1], idx[2]);
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <class Key>
void insert_checked(std::map<Key, double>& table, const Key& key, double value,
                    const std::string& what, int line) {
  auto [it, inserted] = table.emplace(key, value);
  if (!inserted && std::abs(it->second - value) > 1e-14 * std::max(1.0, std::abs(value))) {
    std::ostringstream msg;
    msg << "line " << line << ": " << what << " entry contradicts an earlier permutation ("
        << it->second << " vs " << value << "), tensor is not symmetric";
    throw ValidationError(msg.str());
  }
}

}  // namespace

StructuralModel parse_polynomial_model(std::istream& in) {
  int n = -1;
  std::string section, raw;
  std::map<std::pair<int, int>, double> mass, stiff;
  std::map<std::array<int, 3>, double> quad;
  std::map<std::array<int, 4>, double> cub;
  int line_no = 0;
  auto index = [&](long v) {
    if (n < 0) throw ValidationError("[dimensions] must come first");
    if (v < 1 || v > n) {
      std::ostringstream msg;
      msg << "line " << line_no << ": index " << v << " outside 1.." << n;
      throw ValidationError(msg.str());
    }
    return static_cast<int>(v - 1);
  };
  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = trim(raw.substr(0, raw.find('#')));
    if (line.empty()) continue;
    if (line.front() == '[') {
      section = line;
      continue;
    }
    std::replace(line.begin(), line.end(), '=', ' ');
    std::istringstream ls(line);
    if (section == "[dimensions]") {
      std::string key;
      ls >> key;
      long v = 0;
      if (key == "n_dof" || key == "n") {
        ls >> v;
      } else {
        v = std::stol(key);
      }
      if (v < 1) throw ValidationError("n_dof must be positive");
      n = static_cast<int>(v);
      continue;
    }
    std::vector<double> tok;
    double d;
    while (ls >> d) tok.push_back(d);
    if (!ls.eof()) {
      std::ostringstream msg;
      msg << "line " << line_no << ": cannot parse '" << line << "'";
      throw ValidationError(msg.str());
    }
    auto need = [&](std::size_t k) {
      if (tok.size() != k) {
        std::ostringstream msg;
        msg << "line " << line_no << ": expected " << k << " fields in " << section;
        throw ValidationError(msg.str());
      }
    };
    if (section == "[mass]" || section == "[stiffness]") {
      need(3);
      int r = index(std::lround(tok[0])), c = index(std::lround(tok[1]));
      if (r > c) std::swap(r, c);
      insert_checked(section == "[mass]" ? mass : stiff, {r, c}, tok[2],
                     section == "[mass]" ? "mass" : "stiffness", line_no);
    } else if (section == "[quadratic]") {
      need(4);
      const int p = index(std::lround(tok[0]));
      int r = index(std::lround(tok[1])), s = index(std::lround(tok[2]));
      if (r > s) std::swap(r, s);
      insert_checked(quad, {p, r, s}, tok[3], "quadratic g^p_rs=g^p_sr", line_no);
    } else if (section == "[cubic]") {
      need(5);
      const int p = index(std::lround(tok[0]));
      std::array<int, 3> idx = {index(std::lround(tok[1])), index(std::lround(tok[2])),
                                index(std::lround(tok[3]))};
      std::sort(idx.begin(), idx.end());
      insert_checked(cub, {p, idx[0], idx[1], idx[2]}, tok[4],
                     "cubic h^p_rst (all permutations of r,s,t)", line_no);
    } else {
      throw ValidationError("unknown section " + section);
    }
  }
  if (n < 0) throw ValidationError("missing [dimensions] section");
  Matrix m = Matrix::Zero(n, n), k = Matrix::Zero(n, n);
  for (const auto& [rc, v] : mass) m(rc.first, rc.second) = m(rc.second, rc.first) = v;
  for (const auto& [rc, v] : stiff) k(rc.first, rc.second) = k(rc.second, rc.first) = v;
  std::vector<PolynomialForce::Quadratic> q;
  for (const auto& [key, v] : quad)
    if (v != 0.0) q.push_back({key[0], key[1], key[2], v * multiplicity(key[1], key[2])});
  std::vector<PolynomialForce::Cubic> c;
  for (const auto& [key, v] : cub)
    if (v != 0.0)
      c.push_back({key[0], key[1], key[2], key[3], v * multiplicity(key[1], key[2], key[3])});
  auto force = std::make_shared<PolynomialForce>(n, std::move(q), std::move(c));
  return StructuralModel(std::move(m), std::move(k), std::move(force));
}

StructuralModel load_polynomial_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open model file " + path);
  return parse_polynomial_model(in);
}

void write_polynomial_model(std::ostream& out, const StructuralModel& model) {
  const auto* poly = dynamic_cast<const PolynomialForce*>(&model.force());
  const int n = model.n_dof();
  out << std::setprecision(17);
  out << "[dimensions]\nn_dof " << n << "\n";
  auto upper = [&](const Matrix& a) {
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j)
        if (a(i, j) != 0.0) out << i + 1 << ' ' << j + 1 << ' ' << a(i, j) << '\n';
  };
  out << "[mass]\n";
  upper(model.mass());
  out << "[stiffness]\n";
  upper(model.stiffness());
  if (!poly) return;
  out << "[quadratic]\n";
  for (const auto& q : poly->quadratic())
    out << q.p + 1 << ' ' << q.r + 1 << ' ' << q.s + 1 << ' '
        << q.coefficient / multiplicity(q.r, q.s) << '\n';
  out << "[cubic]\n";
  for (const auto& c : poly->cubic())
    out << c.p + 1 << ' ' << c.r + 1 << ' ' << c.s + 1 << ' ' << c.t + 1 << ' '
        << c.coefficient / multiplicity(c.r, c.s, c.t) << '\n';
}

StructuralModel random_polynomial_model(int n, std::uint64_t seed, double g_scale,
                                        double h_scale) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Matrix a(n, n), b(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = u(rng), b(i, j) = u(rng);
  Matrix m = a * a.transpose() / n + Matrix::Identity(n, n);
  Matrix k = 4.0 * b * b.transpose() + Matrix::Identity(n, n);
  m = 0.5 * (m + m.transpose()).eval();
  k = 0.5 * (k + k.transpose()).eval();

  // Potential-derived: g^p_rs and h^p_rst fully symmetric in all indices.
  std::vector<PolynomialForce::Quadratic> q;
  std::map<std::array<int, 3>, double> g_sym;
  for (int p = 0; p < n; ++p)
    for (int r = p; r < n; ++r)
      for (int s = r; s < n; ++s) g_sym[{p, r, s}] = g_scale * u(rng);
  for (int p = 0; p < n; ++p)
    for (int r = 0; r < n; ++r)
      for (int s = r; s < n; ++s) {
        std::array<int, 3> key = {p, r, s};
        std::sort(key.begin(), key.end());
        q.push_back({p, r, s, g_sym[key] * multiplicity(r, s)});
      }
  std::vector<PolynomialForce::Cubic> c;
  std::map<std::array<int, 4>, double> h_sym;
  for (int p = 0; p < n; ++p)
    for (int r = p; r < n; ++r)
      for (int s = r; s < n; ++s)
        for (int t = s; t < n; ++t) h_sym[{p, r, s, t}] = h_scale * u(rng);
  for (int p = 0; p < n; ++p)
    for (int r = 0; r < n; ++r)
      for (int s = r; s < n; ++s)
        for (int t = s; t < n; ++t) {
          std::array<int, 4> key = {p, r, s, t};
          std::sort(key.begin(), key.end());
          c.push_back({p, r, s, t, h_sym[key] * multiplicity(r, s, t)});
        }
  auto force = std::make_shared<PolynomialForce>(n, std::move(q), std::move(c));
  return StructuralModel(std::move(m), std::move(k), std::move(force));
}

}  // namespace dnrom
