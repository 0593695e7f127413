#include "resonet/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "resonet/parallel.hpp"

namespace resonet {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

void RfBankConfig::validate() const {
    if (n_neurons < 1) throw std::invalid_argument("RfBankConfig: n_neurons must be >= 1");
    if (!(sample_rate > 0)) throw std::invalid_argument("RfBankConfig: sample_rate must be positive");
    if (!(freq_lo > 0 && freq_lo < freq_hi && freq_hi < sample_rate / 2))
        throw std::invalid_argument("RfBankConfig: need 0 < freq_lo < freq_hi < nyquist");
    if (!(decay > 0 && decay < 1))
        throw std::invalid_argument("RfBankConfig: decay must lie strictly inside (0,1)");
    if (!(threshold >= 0)) throw std::invalid_argument("RfBankConfig: threshold must be >= 0");
}

double RfBankConfig::freq(int k) const {
    if (n_neurons == 1) return freq_lo;
    double frac = double(k) / double(n_neurons - 1);
    if (spacing == Spacing::Linear) return freq_lo + (freq_hi - freq_lo) * frac;
    return freq_lo * std::pow(freq_hi / freq_lo, frac);
}

// Negative phase step: the phasor rotates clockwise, so its downward
// imaginary zero crossing lands on the positive real axis, where the graded
// spike rule reads out re(z') = |z|. Analysis at -w carries the same
// information as +w for real signals (states are complex conjugates).
double RfBankConfig::omega_dt(int k) const { return -2 * kPi * freq(k) / sample_rate; }

EncodeResult encode_stft(std::span<const double> samples, const RfBankConfig& bank,
                         const EncodeOptions& opt) {
    bank.validate();
    opt.formats.validate();
    std::size_t T = samples.size();
    std::size_t n = std::size_t(bank.n_neurons);

    EncodeResult res;
    res.spec.n_neurons = bank.n_neurons;
    res.spec.duration = std::int64_t(T);
    if (opt.keep_state) res.state.assign(n * T, {0, 0});

    // Inputs quantized once for the fixed path; all neurons share them.
    std::vector<std::int64_t> raw;
    if (opt.precision == Precision::Fixed) {
        raw.resize(T);
        for (std::size_t t = 0; t < T; ++t) raw[t] = fx_quantize(samples[t], opt.formats.state);
    }

    std::vector<std::vector<SpikeEvent>> per_neuron(n);
    std::vector<FixDiag> per_diag(n);

    parallel_chunks(n, opt.threads, [&](std::size_t kb, std::size_t ke) {
        for (std::size_t k = kb; k < ke; ++k) {
            RfParams p;
            p.decay = bank.decay;
            p.omega_dt = bank.omega_dt(int(k));
            p.threshold = bank.threshold;
            auto& events = per_neuron[k];
            if (opt.precision == Precision::Float) {
                double cr = p.decay * std::cos(p.omega_dt);
                double ci = p.decay * std::sin(p.omega_dt);
                double zr = 0, zi = 0;
                for (std::size_t t = 0; t < T; ++t) {
                    double im_prev = zi;
                    double nr = cr * zr - ci * zi + samples[t];
                    double ni = cr * zi + ci * zr;
                    zr = nr;
                    zi = ni;
                    if (im_prev > 0 && zi <= 0 && zr > p.threshold)
                        events.push_back({std::int64_t(t), std::int32_t(k), zr, true});
                    if (opt.keep_state) res.state[k * T + t] = {zr, zi};
                }
            } else {
                RfParamsFx px = compile_rf(p, opt.formats);
                RfStateX s;
                for (std::size_t t = 0; t < T; ++t) {
                    auto fired = rf_step(s, {raw[t], 0}, px, opt.formats, per_diag[k]);
                    if (fired)
                        events.push_back({std::int64_t(t), std::int32_t(k),
                                          fx_value(*fired, opt.formats.state), true});
                    if (opt.keep_state)
                        res.state[k * T + t] = {fx_value(s.z.re, opt.formats.state),
                                                fx_value(s.z.im, opt.formats.state)};
                }
            }
        }
    });

    std::size_t total = 0;
    for (auto& v : per_neuron) total += v.size();
    res.spec.events.reserve(total);
    for (auto& v : per_neuron)
        res.spec.events.insert(res.spec.events.end(), v.begin(), v.end());
    // Canonical event order: time first, then neuron id.
    std::sort(res.spec.events.begin(), res.spec.events.end(),
              [](const SpikeEvent& a, const SpikeEvent& b) {
                  if (a.t != b.t) return a.t < b.t;
                  return a.neuron < b.neuron;
              });
    for (const FixDiag& d : per_diag) res.diag.saturations += d.saturations;
    return res;
}

std::vector<std::complex<double>> dense_stft_oracle(std::span<const double> samples,
                                                    const RfBankConfig& bank,
                                                    int column_stride, int threads) {
    bank.validate();
    if (column_stride < 1) throw std::invalid_argument("dense_stft_oracle: stride must be >= 1");
    std::size_t T = samples.size();
    std::size_t n = std::size_t(bank.n_neurons);
    std::size_t cols = oracle_columns(T, column_stride);
    std::vector<std::complex<double>> out(n * cols, {0, 0});

    parallel_chunks(n, threads, [&](std::size_t kb, std::size_t ke) {
        for (std::size_t k = kb; k < ke; ++k) {
            double w = bank.omega_dt(int(k));
            double kr = bank.decay * std::cos(w);
            double ki = bank.decay * std::sin(w);
            for (std::size_t j = 0; j < cols; ++j) {
                std::size_t t = j * std::size_t(column_stride);
                // Explicit power recursion: kernel^n tracked separately from
                // the accumulator, a different rounding path than the
                // filter recurrence it checks.
                double pr = 1, pi = 0;
                double accr = 0, acci = 0;
                for (std::size_t m = 0; m <= t; ++m) {
                    double a = samples[t - m];
                    accr += pr * a;
                    acci += pi * a;
                    double npr = pr * kr - pi * ki;
                    pi = pr * ki + pi * kr;
                    pr = npr;
                }
                out[k * cols + j] = {accr, acci};
            }
        }
    });
    return out;
}

namespace {

// Per-neuron synthesis kernels Re/Im(decay^n e^{i w n}) up to the floor.
struct SynthKernels {
    std::size_t len = 0;
    std::vector<double> re;  // [n_neurons x len]
    std::vector<double> im;
    bool with_im = false;
};

SynthKernels make_kernels(const RfBankConfig& bank, double kernel_floor, bool with_im) {
    if (!(kernel_floor > 0 && kernel_floor < 1))
        throw std::invalid_argument("reconstruct: kernel_floor must lie in (0,1)");
    SynthKernels sk;
    sk.with_im = with_im;
    sk.len = std::size_t(std::ceil(std::log(kernel_floor) / std::log(bank.decay)));
    sk.len = std::max<std::size_t>(sk.len, 1);
    std::size_t n = std::size_t(bank.n_neurons);
    sk.re.resize(n * sk.len);
    if (with_im) sk.im.resize(n * sk.len);
    for (std::size_t k = 0; k < n; ++k) {
        double w = bank.omega_dt(int(k));
        double kr = bank.decay * std::cos(w);
        double ki = bank.decay * std::sin(w);
        double pr = 1, pi = 0;
        for (std::size_t nstep = 0; nstep < sk.len; ++nstep) {
            sk.re[k * sk.len + nstep] = pr;
            if (with_im) sk.im[k * sk.len + nstep] = pi;
            double npr = pr * kr - pi * ki;
            pi = pr * ki + pi * kr;
            pr = npr;
        }
    }
    return sk;
}

}  // namespace

std::vector<double> reconstruct(const SpikingSpectrogram& spec, const RfBankConfig& bank,
                                double kernel_floor, int threads) {
    bank.validate();
    if (spec.n_neurons != bank.n_neurons)
        throw std::invalid_argument("reconstruct: spectrogram and bank disagree on n_neurons");
    std::size_t T = std::size_t(spec.duration);
    std::vector<double> out(T, 0.0);
    if (spec.events.empty() || T == 0) return out;

    SynthKernels sk = make_kernels(bank, kernel_floor, false);
    const auto& events = spec.events;
    std::int64_t L = std::int64_t(sk.len);

    // Tiles own disjoint output ranges; every tile walks events in index
    // order, so sums per sample are identical for any tile partition.
    std::size_t tiles = (T + 4095) / 4096;
    parallel_chunks(tiles, threads, [&](std::size_t tb, std::size_t te) {
        for (std::size_t tile = tb; tile < te; ++tile) {
            std::int64_t b = std::int64_t(tile) * 4096;
            std::int64_t e = std::min<std::int64_t>(std::int64_t(T), b + 4096);
            // First event whose window [t0, t0+L) can reach b.
            auto it = std::lower_bound(events.begin(), events.end(), b - L + 1,
                                       [](const SpikeEvent& ev, std::int64_t v) { return ev.t < v; });
            for (; it != events.end() && it->t < e; ++it) {
                std::int64_t t0 = it->t;
                const double* kern = &sk.re[std::size_t(it->neuron) * sk.len];
                std::int64_t n0 = std::max<std::int64_t>(0, b - t0);
                std::int64_t n1 = std::min<std::int64_t>(L, e - t0);
                double m = it->payload;
                for (std::int64_t nstep = n0; nstep < n1; ++nstep)
                    out[std::size_t(t0 + nstep)] += m * kern[nstep];
            }
        }
    });
    return out;
}

double fit_gain(std::span<const double> reference, std::span<const double> raw) {
    if (reference.size() != raw.size())
        throw std::invalid_argument("fit_gain: length mismatch");
    double num = 0, den = 0;
    for (std::size_t i = 0; i < raw.size(); ++i) {
        num += reference[i] * raw[i];
        den += raw[i] * raw[i];
    }
    return den > 0 ? num / den : 0.0;
}

std::vector<double> reconstruct_fit(const SpikingSpectrogram& spec, const RfBankConfig& bank,
                                    std::span<const double> reference, double kernel_floor,
                                    int threads) {
    std::vector<double> raw = reconstruct(spec, bank, kernel_floor, threads);
    double g = fit_gain(reference, raw);
    for (double& x : raw) x *= g;
    return raw;
}

std::vector<double> reconstruct_topk_dense(std::span<const std::complex<double>> state,
                                           const RfBankConfig& bank, std::int64_t k_keep,
                                           std::span<const double> reference,
                                           double kernel_floor, int threads) {
    bank.validate();
    std::size_t n = std::size_t(bank.n_neurons);
    if (n == 0 || state.size() % n != 0)
        throw std::invalid_argument("reconstruct_topk_dense: state is not [n_neurons x T]");
    std::size_t T = state.size() / n;
    if (reference.size() != T)
        throw std::invalid_argument("reconstruct_topk_dense: reference length mismatch");
    std::vector<double> out(T, 0.0);
    if (k_keep <= 0) return out;

    // Largest magnitudes first, ties by flat index so selection is stable.
    std::vector<std::size_t> idx(state.size());
    std::iota(idx.begin(), idx.end(), std::size_t(0));
    std::size_t keep = std::min<std::size_t>(std::size_t(k_keep), idx.size());
    std::nth_element(idx.begin(), idx.begin() + std::ptrdiff_t(keep), idx.end(),
                     [&](std::size_t a, std::size_t b) {
                         double ma = std::norm(state[a]), mb = std::norm(state[b]);
                         if (ma != mb) return ma > mb;
                         return a < b;
                     });
    idx.resize(keep);
    std::sort(idx.begin(), idx.end());  // synthesis order: ascending (k, t)

    SynthKernels sk = make_kernels(bank, kernel_floor, true);
    for (std::size_t flat : idx) {
        std::size_t k = flat / T;
        std::size_t t0 = flat % T;
        double zr = state[flat].real(), zi = state[flat].imag();
        const double* kre = &sk.re[k * sk.len];
        const double* kim = &sk.im[k * sk.len];
        std::size_t n1 = std::min(sk.len, T - t0);
        for (std::size_t m = 0; m < n1; ++m)
            out[t0 + m] += zr * kre[m] - zi * kim[m];
    }
    (void)threads;
    double g = fit_gain(reference, out);
    for (double& x : out) x *= g;
    return out;
}

double pearson(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw std::invalid_argument("pearson: length mismatch");
    std::size_t n = a.size();
    if (n == 0) return 0;
    double ma = 0, mb = 0;
    for (std::size_t i = 0; i < n; ++i) {
        ma += a[i];
        mb += b[i];
    }
    ma /= double(n);
    mb /= double(n);
    double sab = 0, saa = 0, sbb = 0;
    for (std::size_t i = 0; i < n; ++i) {
        double da = a[i] - ma, db = b[i] - mb;
        sab += da * db;
        saa += da * da;
        sbb += db * db;
    }
    if (saa <= 0 || sbb <= 0) return 0;
    return sab / std::sqrt(saa * sbb);
}

CompressionReport compression_report(const SpikingSpectrogram& spec,
                                     std::span<const double> samples,
                                     const RfBankConfig& bank,
                                     std::span<const std::int64_t> topk, int threads) {
    bank.validate();
    CompressionReport rep;
    rep.n_spikes = std::int64_t(spec.events.size());
    rep.n_dense = std::int64_t(spec.n_neurons) * spec.duration;
    if (rep.n_spikes == 0) {
        rep.bandwidth_ratio = std::numeric_limits<double>::infinity();
        rep.correlation = 0;  // convention: no spikes, no signal
    } else {
        rep.bandwidth_ratio = double(rep.n_dense) / double(rep.n_spikes);
        std::vector<double> rec = reconstruct_fit(spec, bank, samples, 1e-4, threads);
        rep.correlation = pearson(samples, rec);
    }
    if (!topk.empty()) {
        EncodeOptions opt;
        opt.keep_state = true;
        opt.threads = threads;
        EncodeResult dense = encode_stft(samples, bank, opt);
        for (std::int64_t k : topk) {
            std::vector<double> rec =
                reconstruct_topk_dense(dense.state, bank, k, samples, 1e-4, threads);
            rep.dense_baseline.push_back({k, pearson(samples, rec)});
        }
    }
    return rep;
}

}  // namespace resonet
