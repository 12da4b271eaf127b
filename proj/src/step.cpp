#include "dnrom/step.hpp"

#include <algorithm>

#include "dnrom/errors.hpp"

namespace dnrom {

namespace {

struct Parts {
  Vector even, odd;
};

Parts split(const StructuralModel& model, const Vector& x, const StepOptions& opt) {
  const double l = opt.amplitude;
  const Vector fp = model.nonlinear_force(l * x);
  const Vector fm = model.nonlinear_force(-l * x);
  return {(fp + fm) / (2 * l * l), (fp - fm) / (2 * l * l * l)};
}

void check_size(const StructuralModel& model, const Vector& v) {
  if (v.size() != model.n_dof()) throw ValidationError("vector size does not match model");
}

}  // namespace

Vector quadratic_part(const StructuralModel& model, const Vector& x, const StepOptions& opt) {
  check_size(model, x);
  return split(model, x, opt).even;
}

Vector cubic_part(const StructuralModel& model, const Vector& x, const StepOptions& opt) {
  check_size(model, x);
  return split(model, x, opt).odd;
}

Vector quadratic_force(const StructuralModel& model, const Vector& v, const Vector& w,
                       const StepOptions& opt) {
  check_size(model, v);
  check_size(model, w);
  // Q(v) + Q(w) is commutative, so G(v, w) == G(w, v) bit for bit.
  return 0.5 * (quadratic_part(model, v + w, opt) -
                (quadratic_part(model, v, opt) + quadratic_part(model, w, opt)));
}

Vector cubic_force(const StructuralModel& model, const Vector& u, const Vector& v,
                   const Vector& w, const StepOptions& opt) {
  check_size(model, u);
  check_size(model, v);
  check_size(model, w);
  auto t = [&](const Vector& x) { return cubic_part(model, x, opt); };
  return (t(u + v + w) - t(u + v) - t(v + w) - t(u + w) + t(u) + t(v) + t(w)) / 6.0;
}

const Vector& StepTensors::G(int i, int j) const {
  if (i > j) std::swap(i, j);
  return g.at({i, j});
}

const Vector& StepTensors::H(int i, int j, int k) const {
  std::array<int, 3> key = {i, j, k};
  std::sort(key.begin(), key.end());
  return h.at(key);
}

StepTensors step_tensors(const StructuralModel& model, const Spectrum& spectrum,
                         const std::vector<int>& masters, const StepOptions& opt) {
  const int n = static_cast<int>(masters.size());
  for (int m : masters)
    if (m < 0 || m >= spectrum.n_computed()) throw ValidationError("master outside spectrum");

  StepTensors out;
  out.masters = masters;
  // Even/odd parts at each integer combination of master modes, evaluated once.
  std::map<std::vector<int>, Parts> cache;
  auto parts = [&](const std::vector<int>& combo) -> const Parts& {
    auto it = cache.find(combo);
    if (it != cache.end()) return it->second;
    Vector x = Vector::Zero(model.n_dof());
    for (int a = 0; a < n; ++a)
      if (combo[a]) x += combo[a] * spectrum.phis.col(masters[a]);
    out.evaluations += 2;
    return cache.emplace(combo, split(model, x, opt)).first->second;
  };
  auto combo = [&](std::initializer_list<int> idx) {
    std::vector<int> c(n, 0);
    for (int a : idx) ++c[a];
    return c;
  };

  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j)
      out.g[{i, j}] = 0.5 * (parts(combo({i, j})).even - parts(combo({i})).even -
                             parts(combo({j})).even);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j)
      for (int k = j; k < n; ++k) {
        auto t = [&](std::initializer_list<int> idx) -> const Vector& {
          return parts(combo(idx)).odd;
        };
        out.h[{i, j, k}] = (t({i, j, k}) - t({i, j}) - t({j, k}) - t({i, k}) + t({i}) +
                            t({j}) + t({k})) /
                           6.0;
      }
  return out;
}

std::size_t step_evaluation_count(int n) {
  const std::size_t m = n;
  return 2 * (m + m * (m + 1) / 2 + m * (m + 1) * (m + 2) / 6);
}

}  // namespace dnrom
