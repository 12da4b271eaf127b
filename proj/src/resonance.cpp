#include "dnrom/resonance.hpp"

#include <algorithm>
#include <cmath>
#include <regex>
#include <sstream>

#include "dnrom/errors.hpp"

namespace dnrom {

namespace {

constexpr std::array<std::array<int, 3>, 4> kPatterns = {
    {{1, 1, 1}, {-1, 1, 1}, {1, -1, 1}, {1, 1, -1}}};

bool is_trivial(const std::array<int, 3>& t, const std::array<int, 3>& sg, int s,
                const std::vector<int>& masters) {
  for (int a = 0; a < 3; ++a)
    for (int b = a + 1; b < 3; ++b)
      if (t[a] == t[b] && sg[a] == -sg[b]) {
        const int rem = 3 - a - b;
        if (sg[rem] > 0 && masters[t[rem]] == s) return true;
      }
  return false;
}

int position(const std::vector<int>& masters, int mode) {
  auto it = std::find(masters.begin(), masters.end(), mode);
  if (it == masters.end()) {
    std::ostringstream msg;
    msg << "declared resonance refers to mode " << mode + 1 << " which is not a master";
    throw ValidationError(msg.str());
  }
  return static_cast<int>(it - masters.begin());
}

}  // namespace

ResonanceDeclaration parse_resonance(const std::string& text) {
  static const std::regex ratio(R"(\s*(\d+)\s*:\s*(\d+)\s*\(\s*(\d+)\s*,\s*(\d+)\s*\)\s*)");
  std::smatch m;
  ResonanceDeclaration d;
  if (std::regex_match(text, m, ratio)) {
    d.p = std::stoi(m[1]);
    d.q = std::stoi(m[2]);
    d.modes = {std::stoi(m[3]) - 1, std::stoi(m[4]) - 1};
    if (d.p < 1 || d.q < 1 || d.modes[0] < 0 || d.modes[1] < 0 || d.modes[0] == d.modes[1])
      throw ValidationError("bad resonance ratio '" + text + "'");
    return d;
  }
  std::vector<int> v;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      v.push_back(std::stoi(item) - 1);
    } catch (const std::exception&) {
      throw ValidationError("bad resonance tuple '" + text + "'");
    }
  }
  if (v.size() < 3 || v.size() > 4 || *std::min_element(v.begin(), v.end()) < 0)
    throw ValidationError("resonance tuple needs s,i,j or s,i,j,k (1-based): '" + text + "'");
  d.s = v[0];
  d.modes.assign(v.begin() + 1, v.end());
  return d;
}

std::vector<int> ResonanceSet::second_border(int i, int j, bool sum) const {
  if (i > j) std::swap(i, j);
  std::vector<int> out;
  for (const auto& r : second_order)
    if (r.i == i && r.j == j && r.sum == sum &&
        std::find(out.begin(), out.end(), r.s) == out.end())
      out.push_back(r.s);
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<int> ResonanceSet::third_border(int i, int j, int k) const {
  std::array<int, 3> t = {i, j, k};
  std::sort(t.begin(), t.end());
  std::vector<int> out;
  for (const auto& r : third_order)
    if (r.triple == t && std::find(out.begin(), out.end(), r.s) == out.end()) out.push_back(r.s);
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<int> ResonanceSet::third_equations(int i, int j, int k) const {
  std::vector<int> out;
  for (int s : third_border(i, j, k)) {
    auto it = std::find(masters.begin(), masters.end(), s);
    if (it != masters.end()) out.push_back(static_cast<int>(it - masters.begin()));
  }
  return out;
}

ResonanceSet detect_resonances(const Spectrum& spectrum, const std::vector<int>& masters,
                               double tol, const std::vector<ResonanceDeclaration>& declared) {
  if (!(tol > 0)) throw ValidationError("resonance tolerance must be positive");
  ResonanceSet set;
  set.tolerance = tol;
  set.masters = masters;
  const int n = static_cast<int>(masters.size());
  const int ns = spectrum.n_computed();
  auto w = [&](int a) { return spectrum.omega(masters[a]); };
  auto rel = [&](double sigma, int s) {
    const double ws2 = spectrum.omega(s) * spectrum.omega(s);
    return std::abs(sigma * sigma - ws2) / ws2;
  };
  auto warn = [&](const std::string& what, double sigma, int s, double r) {
    std::ostringstream msg;
    msg << "near resonance " << what << ": sigma=" << sigma << " rad/s vs mode " << s + 1
        << " (relative gap " << r << ")";
    set.warnings.push_back(msg.str());
  };

  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j)
      for (int sum = 1; sum >= 0; --sum) {
        if (!sum && i == j) continue;
        const double sigma = sum ? w(i) + w(j) : std::abs(w(j) - w(i));
        for (int s = 0; s < ns; ++s) {
          const double r = rel(sigma, s);
          if (r <= tol)
            set.second_order.push_back({s, i, j, sum == 1, sigma, false});
          else if (r <= 10 * tol)
            warn(sum ? "w_i+w_j" : "w_j-w_i", sigma, s, r);
        }
      }

  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j)
      for (int k = j; k < n; ++k) {
        const std::array<int, 3> t = {i, j, k};
        for (const auto& sg : kPatterns) {
          const double sigma = sg[0] * w(i) + sg[1] * w(j) + sg[2] * w(k);
          for (int s = 0; s < ns; ++s) {
            const bool trivial = is_trivial(t, sg, s, masters);
            const double r = rel(sigma, s);
            if (trivial || r <= tol)
              set.third_order.push_back({s, t, sg, sigma, trivial, false});
            else if (r <= 10 * tol)
              warn("+-w_i+-w_j+-w_k", sigma, s, r);
          }
        }
      }

  for (const auto& d : declared) {
    if (d.p > 0) {
      // Virtual integer frequencies: larger ratio entry goes to the higher actual mode.
      const int a = position(masters, d.modes[0]);
      const int b = position(masters, d.modes[1]);
      const int hi = std::max(d.p, d.q), lo = std::min(d.p, d.q);
      const bool b_higher = spectrum.omega(d.modes[1]) >= spectrum.omega(d.modes[0]);
      const int va = b_higher ? lo : hi, vb = b_higher ? hi : lo;
      const std::array<int, 2> pos = {a, b};
      const std::array<int, 2> vf = {va, vb};
      for (int x = 0; x < 2; ++x)
        for (int y = x; y < 2; ++y)
          for (int e = 0; e < 2; ++e) {
            const int target = vf[e];
            if (vf[x] + vf[y] == target)
              set.second_order.push_back({masters[pos[e]], std::min(pos[x], pos[y]),
                                          std::max(pos[x], pos[y]), true, w(pos[x]) + w(pos[y]), true});
            if (x != y && std::abs(vf[y] - vf[x]) == target)
              set.second_order.push_back({masters[pos[e]], std::min(pos[x], pos[y]),
                                          std::max(pos[x], pos[y]), false,
                                          std::abs(w(pos[y]) - w(pos[x])), true});
          }
      for (int x = 0; x < 2; ++x)
        for (int y = x; y < 2; ++y)
          for (int z = y; z < 2; ++z) {
            std::array<int, 3> t = {pos[x], pos[y], pos[z]};
            std::sort(t.begin(), t.end());
            const std::array<int, 3> v = {vf[x], vf[y], vf[z]};
            for (const auto& sg : kPatterns)
              for (int e = 0; e < 2; ++e) {
                const int s = masters[pos[e]];
                if (std::abs(sg[0] * v[0] + sg[1] * v[1] + sg[2] * v[2]) != vf[e]) continue;
                if (is_trivial(t, sg, s, masters)) continue;
                const double sigma = sg[0] * w(t[0]) + sg[1] * w(t[1]) + sg[2] * w(t[2]);
                set.third_order.push_back({s, t, sg, sigma, false, true});
              }
          }
      continue;
    }
    if (d.s < 0 || d.s >= ns) throw ValidationError("declared resonance mode outside spectrum");
    std::vector<int> pos;
    for (int m : d.modes) pos.push_back(position(masters, m));
    std::sort(pos.begin(), pos.end());
    const double ws = spectrum.omega(d.s);
    if (pos.size() == 2) {
      const double ssum = w(pos[0]) + w(pos[1]);
      const double sdif = std::abs(w(pos[1]) - w(pos[0]));
      const bool sum = std::abs(ssum - ws) <= std::abs(sdif - ws) || pos[0] == pos[1];
      set.second_order.push_back({d.s, pos[0], pos[1], sum, sum ? ssum : sdif, true});
    } else {
      const std::array<int, 3> t = {pos[0], pos[1], pos[2]};
      double best = 1e300;
      std::array<int, 3> best_sg{};
      for (const auto& sg : kPatterns) {
        const double sigma = sg[0] * w(t[0]) + sg[1] * w(t[1]) + sg[2] * w(t[2]);
        if (std::abs(std::abs(sigma) - ws) < best) best = std::abs(std::abs(sigma) - ws), best_sg = sg;
      }
      const double sigma = best_sg[0] * w(t[0]) + best_sg[1] * w(t[1]) + best_sg[2] * w(t[2]);
      set.third_order.push_back({d.s, t, best_sg, sigma, false, true});
    }
  }
  return set;
}

}  // namespace dnrom
