#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

#include "resonet/neuron.hpp"

namespace resonet {

// A bank of RF neurons, one per analysis frequency, stepped once per audio
// sample. Each neuron's state is the exponential-window STFT coefficient at
// its frequency.
struct RfBankConfig {
    int n_neurons = 100;
    double freq_lo = 80;
    double freq_hi = 5000;
    enum class Spacing { Linear, Log } spacing = Spacing::Log;
    double decay = 0.999;  // ~60 ms window at 16 kHz
    double threshold = 0.02;
    double sample_rate = 16000;

    void validate() const;
    double freq(int k) const;      // Hz of neuron k
    double omega_dt(int k) const;  // radians per sample
};

struct SpikingSpectrogram {
    int n_neurons = 0;
    std::int64_t duration = 0;          // timesteps (= samples)
    std::vector<SpikeEvent> events;     // graded, nondecreasing t, ties by neuron
};

struct EncodeOptions {
    Precision precision = Precision::Float;
    bool keep_state = false;  // retain dense state [n_neurons x T] for diagnostics
    int threads = 1;
    EngineFormats formats;
};

struct EncodeResult {
    SpikingSpectrogram spec;
    std::vector<std::complex<double>> state;  // row-major [n_neurons x T] when kept
    FixDiag diag;
};

EncodeResult encode_stft(std::span<const double> samples, const RfBankConfig& bank,
                         const EncodeOptions& opt = {});

// Direct evaluation of z_k[t] = sum_n kernel^n * a[t-n], the oracle for
// encode_stft's internal state. Columns are evaluated at t = j*column_stride;
// the returned matrix is row-major [n_neurons x n_columns]. Stride 1 is the
// full matrix; larger strides spot-check long runs at full precision.
std::vector<std::complex<double>> dense_stft_oracle(std::span<const double> samples,
                                                    const RfBankConfig& bank,
                                                    int column_stride = 1, int threads = 1);

inline std::size_t oracle_columns(std::size_t n_samples, int column_stride) {
    return (n_samples + std::size_t(column_stride) - 1) / std::size_t(column_stride);
}

// Synthesis: every event (t0, k, m) contributes m * Re(decay^n e^{i w_k n})
// for n = t - t0 >= 0, truncated once the envelope falls below kernel_floor.
// The raw sum has arbitrary scale; fit_gain supplies the least-squares scalar
// against a reference signal.
std::vector<double> reconstruct(const SpikingSpectrogram& spec, const RfBankConfig& bank,
                                double kernel_floor = 1e-4, int threads = 1);

double fit_gain(std::span<const double> reference, std::span<const double> raw);

std::vector<double> reconstruct_fit(const SpikingSpectrogram& spec, const RfBankConfig& bank,
                                    std::span<const double> reference,
                                    double kernel_floor = 1e-4, int threads = 1);

// Dense-readout baseline: keep the K largest-magnitude coefficients of the
// dense state (ties broken by index), synthesize them with the same kernel,
// and fit the same way. Used for spikes-vs-dense efficiency comparisons.
std::vector<double> reconstruct_topk_dense(std::span<const std::complex<double>> state,
                                           const RfBankConfig& bank, std::int64_t k_keep,
                                           std::span<const double> reference,
                                           double kernel_floor = 1e-4, int threads = 1);

double pearson(std::span<const double> a, std::span<const double> b);

struct CompressionReport {
    std::int64_t n_spikes = 0;
    std::int64_t n_dense = 0;        // n_neurons x T complex values
    double bandwidth_ratio = 0;      // n_dense / n_spikes, inf sentinel when no spikes
    double correlation = 0;          // Pearson(input, fitted reconstruction)
    struct TopK {
        std::int64_t k;
        double correlation;
    };
    std::vector<TopK> dense_baseline;  // filled when top-k list requested
};

CompressionReport compression_report(const SpikingSpectrogram& spec,
                                     std::span<const double> samples,
                                     const RfBankConfig& bank,
                                     std::span<const std::int64_t> topk = {},
                                     int threads = 1);

}  // namespace resonet
