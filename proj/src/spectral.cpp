#include "sheat/spectral.hpp"

#include "sheat/tensor.hpp"

#include <fftw3.h>

#include <cmath>
#include <mutex>
#include <numbers>

namespace sheat {

namespace {
// FFTW's planner is not thread safe; execution with new-array calls is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

struct SpectralPlan::AxisPlans {
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;
  Eigen::Index outer = 1, len = 1, inner = 1;
};

SpectralPlan::SpectralPlan(const GridSpec& grid) : grid_(grid) {
  const int N = grid.dim();
  const int n = grid.n;
  auto ext = grid.extents();
  std::vector<double> scratch(static_cast<std::size_t>(grid.size()));
  std::lock_guard<std::mutex> lock(planner_mutex());
  for (int a = 0; a < N; ++a) {
    auto p = std::make_unique<AxisPlans>();
    p->outer = product(ext, 0, a);
    p->len = n;
    p->inner = product(ext, a + 1, ext.size());
    Eigen::ArrayXd k(n);
    fftw_r2r_kind fk, bk;
    switch (grid.axes[a]) {
      case AxisKind::antisymmetric:
        fk = bk = FFTW_RODFT00;
        for (int j = 0; j < n; ++j) k[j] = std::numbers::pi * (j + 1) / grid.L;
        norm_.push_back(1.0 / (2.0 * (n + 1)));
        break;
      case AxisKind::symmetric:
        fk = FFTW_RODFT10;
        bk = FFTW_RODFT01;
        for (int j = 0; j < n; ++j) k[j] = std::numbers::pi * (j + 1) / (2.0 * grid.L);
        norm_.push_back(1.0 / (2.0 * n));
        break;
      case AxisKind::periodic:
        fk = FFTW_R2HC;
        bk = FFTW_HC2R;
        for (int j = 0; j < n; ++j) {
          int kk = j <= n / 2 ? j : n - j;
          k[j] = std::numbers::pi * kk / grid.L;
        }
        norm_.push_back(1.0 / n);
        break;
    }
    k_.push_back(k);
    int len = n;
    const int inner = static_cast<int>(p->inner);
    unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    p->forward = fftw_plan_many_r2r(1, &len, inner, scratch.data(), nullptr, inner, 1, scratch.data(),
                                    nullptr, inner, 1, &fk, flags);
    p->backward = fftw_plan_many_r2r(1, &len, inner, scratch.data(), nullptr, inner, 1, scratch.data(),
                                     nullptr, inner, 1, &bk, flags);
    plans_.push_back(std::move(p));
  }
}

SpectralPlan::~SpectralPlan() {
  std::lock_guard<std::mutex> lock(planner_mutex());
  for (auto& p : plans_) {
    fftw_destroy_plan(p->forward);
    fftw_destroy_plan(p->backward);
  }
}

Eigen::ArrayXd SpectralPlan::apply(double t, const Eigen::ArrayXd& v) const {
  if (v.size() != grid_.size()) throw std::invalid_argument("spectral apply: size mismatch");
  Eigen::ArrayXd w = v;
  const int N = grid_.dim();
  auto ext = grid_.extents();
  for (int a = 0; a < N; ++a) {
    const auto& p = *plans_[a];
    for (Eigen::Index o = 0; o < p.outer; ++o) {
      double* ptr = w.data() + o * p.len * p.inner;
      fftw_execute_r2r(p.forward, ptr, ptr);
    }
  }
  for (int a = 0; a < N; ++a) {
    Eigen::ArrayXd f = (-t * k_[a].square()).exp() * norm_[a];
    scale_along_axis(w, ext, a, f);
  }
  for (int a = 0; a < N; ++a) {
    const auto& p = *plans_[a];
    for (Eigen::Index o = 0; o < p.outer; ++o) {
      double* ptr = w.data() + o * p.len * p.inner;
      fftw_execute_r2r(p.backward, ptr, ptr);
    }
  }
  return w;
}

}  // namespace sheat
