#pragma once

#include <complex>
#include <map>
#include <mutex>
#include <utility>
#include <vector>

#include <fftw3.h>

namespace kinac {

using cplx = std::complex<double>;

namespace detail {

// FFTW planning is not thread-safe; execution of an existing plan is.
class PlanCache
{
public:
  static PlanCache& instance()
  {
    static PlanCache cache;
    return cache;
  }

  fftw_plan get(int n, int sign)
  {
    std::lock_guard<std::mutex> lock(mutex_);
    auto key = std::make_pair(n, sign);
    auto it = plans_.find(key);
    if (it != plans_.end())
      return it->second;
    std::vector<cplx> in(n), out(n);
    fftw_plan p = fftw_plan_dft_1d(n, reinterpret_cast<fftw_complex*>(in.data()),
                                   reinterpret_cast<fftw_complex*>(out.data()), sign,
                                   FFTW_ESTIMATE | FFTW_UNALIGNED);
    plans_.emplace(key, p);
    return p;
  }

  ~PlanCache()
  {
    for (auto& kv : plans_)
      fftw_destroy_plan(kv.second);
  }

private:
  std::mutex mutex_;
  std::map<std::pair<int, int>, fftw_plan> plans_;
};

}  // namespace detail

/// Unnormalized DFT, out_k = sum_j in_j exp(sign * 2 pi i jk/n), sign = -1 forward.
inline std::vector<cplx> dft(const std::vector<cplx>& in, int sign)
{
  const int n = static_cast<int>(in.size());
  std::vector<cplx> out(n);
  auto plan = detail::PlanCache::instance().get(n, sign < 0 ? FFTW_FORWARD : FFTW_BACKWARD);
  std::vector<cplx> tmp(in);
  fftw_execute_dft(plan, reinterpret_cast<fftw_complex*>(tmp.data()),
                   reinterpret_cast<fftw_complex*>(out.data()));
  return out;
}

}  // namespace kinac
