// BSS Eval v3 source decomposition. Each estimate is projected onto the
// span of delayed copies (0..L-1) of its own reference (target) and of all
// references (target + interference); the remainder is the artifact term.
// Projections use normal equations whose Gram entries are reference
// cross-correlations.

#include <algorithm>
#include <cmath>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "voicebench/error.hpp"
#include "voicebench/metrics.hpp"

namespace voicebench {

namespace {

constexpr double kDamping = 1e-10;

/// c(k) = sum_t a(t) b(t + k) for k in [-(max_lag), max_lag], stored at
/// index k + max_lag.
std::vector<double> cross_correlation(std::span<const Complex> a_spec,
                                      std::span<const Complex> b_spec,
                                      std::size_t max_lag) {
  const std::size_t n = a_spec.size();
  std::vector<Complex> prod(n);
  for (std::size_t i = 0; i < n; ++i) prod[i] = std::conj(a_spec[i]) * b_spec[i];
  fft_inplace(prod, true);
  std::vector<double> out(2 * max_lag + 1);
  const double inv = 1.0 / static_cast<double>(n);
  for (std::size_t j = 0; j < out.size(); ++j) {
    const auto k = static_cast<std::ptrdiff_t>(j) - static_cast<std::ptrdiff_t>(max_lag);
    const std::size_t idx = k >= 0 ? static_cast<std::size_t>(k)
                                   : n - static_cast<std::size_t>(-k);
    out[j] = prod[idx].real() * inv;
  }
  return out;
}

std::vector<Complex> spectrum(std::span<const double> x, std::size_t n) {
  std::vector<Complex> buf(n);
  for (std::size_t i = 0; i < x.size(); ++i) buf[i] = x[i];
  fft_inplace(buf);
  return buf;
}

struct Projector {
  std::vector<std::size_t> sources;  // which references span the subspace
  Eigen::LLT<Eigen::MatrixXd> factor;
  bool ok = false;
};

}  // namespace

std::vector<BssSourceScores> bss_eval(std::span<const AudioBuffer> refs,
                                      std::span<const AudioBuffer> ests,
                                      std::size_t filter_len) {
  const std::size_t n_src = refs.size();
  if (n_src == 0 || ests.size() != n_src) {
    fail(Errc::InvalidArgument, "bss_eval needs equal, non-zero source counts");
  }
  if (filter_len < 1) fail(Errc::InvalidArgument, "filter_len must be >= 1");

  // Common length across all pairs, honouring the trim tolerance.
  const int rate = refs[0].sample_rate();
  std::size_t length = refs[0].frames();
  std::size_t longest = 0;
  bool trimmed = false;
  for (std::size_t j = 0; j < n_src; ++j) {
    for (const AudioBuffer* b : {&refs[j], &ests[j]}) {
      if (!b->is_mono()) fail(Errc::NotMono, "bss_eval expects mono signals");
      if (b->sample_rate() != rate) fail(Errc::RateMismatch, "mixed sample rates");
      length = std::min(length, b->frames());
      longest = std::max(longest, b->frames());
    }
  }
  if (static_cast<double>(longest - length) > kMaxLengthMismatchS * rate) {
    fail(Errc::LengthMismatch, "source lengths differ by more than " +
                                   std::to_string(kMaxLengthMismatchS) + " s");
  }
  trimmed = longest != length;
  if (length == 0) fail(Errc::EmptySignal, "bss_eval of empty signals");

  const std::size_t L = filter_len;
  const std::size_t padded = length + L - 1;
  const std::size_t n_fft = next_power_of_two(length + L);

  std::vector<std::span<const double>> r(n_src), e(n_src);
  std::vector<std::vector<Complex>> r_spec(n_src);
  std::vector<double> r_energy(n_src);
  for (std::size_t j = 0; j < n_src; ++j) {
    r[j] = refs[j].mono_samples().first(length);
    e[j] = ests[j].mono_samples().first(length);
    r_spec[j] = spectrum(r[j], n_fft);
    r_energy[j] = energy(r[j]);
  }

  std::vector<BssSourceScores> out(n_src);

  // Silent or collinear references make the decomposition meaningless for
  // the sources involved.
  std::vector<bool> singular(n_src, false);
  for (std::size_t a = 0; a < n_src; ++a) {
    if (!(r_energy[a] > 0.0)) singular[a] = true;
    for (std::size_t b = a + 1; b < n_src; ++b) {
      const double denom = std::sqrt(r_energy[a] * r_energy[b]);
      if (denom > 0.0 && std::abs(dot(r[a], r[b])) >= (1.0 - 1e-12) * denom) {
        singular[a] = singular[b] = true;
      }
    }
  }

  // Gram blocks: G[(a,d1),(b,d2)] = c_ab(d1 - d2).
  std::vector<std::vector<double>> xcorr(n_src * n_src);
  for (std::size_t a = 0; a < n_src; ++a) {
    for (std::size_t b = a; b < n_src; ++b) {
      xcorr[a * n_src + b] = cross_correlation(r_spec[a], r_spec[b], L - 1);
    }
  }
  auto gram_entry = [&](std::size_t a, std::size_t d1, std::size_t b, std::size_t d2) {
    const auto lag = static_cast<std::ptrdiff_t>(d1) - static_cast<std::ptrdiff_t>(d2);
    if (a <= b) {
      return xcorr[a * n_src + b][static_cast<std::size_t>(lag + static_cast<std::ptrdiff_t>(L) - 1)];
    }
    return xcorr[b * n_src + a][static_cast<std::size_t>(-lag + static_cast<std::ptrdiff_t>(L) - 1)];
  };

  auto make_projector = [&](std::vector<std::size_t> sources) {
    Projector p;
    p.sources = std::move(sources);
    const std::size_t dim = p.sources.size() * L;
    Eigen::MatrixXd gram(dim, dim);
    for (std::size_t i = 0; i < p.sources.size(); ++i) {
      for (std::size_t d1 = 0; d1 < L; ++d1) {
        for (std::size_t k = 0; k < p.sources.size(); ++k) {
          for (std::size_t d2 = 0; d2 < L; ++d2) {
            gram(static_cast<Eigen::Index>(i * L + d1), static_cast<Eigen::Index>(k * L + d2)) =
                gram_entry(p.sources[i], d1, p.sources[k], d2);
          }
        }
      }
    }
    const double trace = gram.trace();
    if (!(trace > 0.0) || !std::isfinite(trace)) return p;
    gram.diagonal().array() += kDamping * trace;
    p.factor.compute(gram);
    p.ok = p.factor.info() == Eigen::Success;
    return p;
  };

  // Returns the projection of `est` (zero-padded to `padded`) onto the
  // projector's subspace, or an empty vector if the solve failed.
  auto project = [&](const Projector& p, std::span<const double> est) {
    if (!p.ok) return std::vector<double>{};
    const auto est_spec = spectrum(est, n_fft);
    const std::size_t dim = p.sources.size() * L;
    Eigen::VectorXd rhs(dim);
    for (std::size_t i = 0; i < p.sources.size(); ++i) {
      const auto c = cross_correlation(r_spec[p.sources[i]], est_spec, L - 1);
      for (std::size_t d = 0; d < L; ++d) {
        rhs(static_cast<Eigen::Index>(i * L + d)) = c[L - 1 + d];
      }
    }
    const Eigen::VectorXd coef = p.factor.solve(rhs);
    if (!coef.allFinite()) return std::vector<double>{};
    std::vector<double> proj(padded, 0.0);
    std::vector<double> taps(L);
    for (std::size_t i = 0; i < p.sources.size(); ++i) {
      for (std::size_t d = 0; d < L; ++d) taps[d] = coef(static_cast<Eigen::Index>(i * L + d));
      const auto y = fft_convolve(r[p.sources[i]], taps);
      for (std::size_t t = 0; t < padded; ++t) proj[t] += y[t];
    }
    return proj;
  };

  std::vector<std::size_t> all(n_src);
  for (std::size_t j = 0; j < n_src; ++j) all[j] = j;
  const Projector all_proj = make_projector(all);

  for (std::size_t j = 0; j < n_src; ++j) {
    auto& res = out[j];
    if (trimmed) detail::add_flag(res.flags, flag::kLengthTrimmed);
    if (singular[j]) {
      res.error = std::string(errc_name(Errc::SingularProjection));
      continue;
    }
    const Projector target_proj = make_projector({j});
    const auto s_target = project(target_proj, e[j]);
    const auto p_all = project(all_proj, e[j]);
    if (s_target.empty() || p_all.empty()) {
      res.error = std::string(errc_name(Errc::SingularProjection));
      continue;
    }

    double target = 0.0, interf = 0.0, artif = 0.0, distortion = 0.0, signal = 0.0;
    for (std::size_t t = 0; t < padded; ++t) {
      const double est_t = t < length ? e[j][t] : 0.0;
      const double ei = p_all[t] - s_target[t];
      const double ea = est_t - p_all[t];
      target += s_target[t] * s_target[t];
      interf += ei * ei;
      artif += ea * ea;
      distortion += (ei + ea) * (ei + ea);
      signal += p_all[t] * p_all[t];
    }
    const Score sdr = detail::ratio_db(target, distortion);
    const Score sir = detail::ratio_db(target, interf);
    const Score sar = detail::ratio_db(signal, artif);
    res.sdr = sdr.value;
    res.sir = sir.value;
    res.sar = sar.value;
    for (const Score* s : {&sdr, &sir, &sar}) {
      for (const auto& f : s->flags) detail::add_flag(res.flags, f);
    }
  }
  return out;
}

}  // namespace voicebench
