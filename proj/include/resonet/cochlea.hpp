#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <span>
#include <vector>

#include "resonet/neuron.hpp"

namespace resonet {

struct BiquadCoeffs {
    double b0 = 1, b1 = 0, b2 = 0;  // numerator
    double a1 = 0, a2 = 0;          // denominator (a0 normalized to 1)
};

// Direct-form II transposed; one second-order section.
struct Biquad {
    BiquadCoeffs c;
    double s1 = 0, s2 = 0;
    double step(double x) {
        double y = c.b0 * x + s1;
        s1 = c.b1 * x - c.a1 * y + s2;
        s2 = c.b2 * x - c.a2 * y;
        return y;
    }
    void reset() { s1 = s2 = 0; }
};

// 6th-order Butterworth low-pass as three biquads, bilinear transform with
// the frequency axis pre-warped so the -3 dB point lands exactly on cutoff.
std::array<BiquadCoeffs, 3> design_butterworth6(double cutoff_rad_s, double sample_rate);

// |H(e^{j omega})| of the cascade at omega = 2*pi*f/fs.
double butterworth6_gain(const std::array<BiquadCoeffs, 3>& coeffs, double freq_hz,
                         double sample_rate);

// Complex signals run the real filter independently on both components.
struct ComplexBiquadChain {
    std::array<Biquad, 3> re, im;
    std::complex<double> step(std::complex<double> x) {
        double r = x.real(), i = x.imag();
        for (auto& b : re) r = b.step(r);
        for (auto& b : im) i = b.step(i);
        return {r, i};
    }
    void reset() {
        for (auto& b : re) b.reset();
        for (auto& b : im) b.reset();
    }
};

// One cochlear section: Hopf resonator followed by the Butterworth coupling
// filter (cutoff 1.05*omega0) that band-limits what the next section sees.
struct CochleaSection {
    HopfParams hopf;
    int oversample = 1;  // RK4 substeps per audio sample so dt*omega0 <= 0.5
    std::complex<double> z{0, 0};
    ComplexBiquadChain lpf;
    int index = 0;  // position in the cascade, for error messages

    // Advances one audio sample (input held across substeps) and returns the
    // low-passed response handed to the next section.
    std::complex<double> step(std::complex<double> input);

    void reset();
};

struct CascadeConfig {
    double f_hi = 4000;  // Hz, base (first section)
    double f_lo = 1000;  // Hz, apex (last section)
    int sections_per_octave = 6;
    double lambda = -0.05;
    double sample_rate = 16000;
    double output_ceiling = 1e4;  // divergence detector

    void validate() const;
};

// Section characteristic frequencies, geometrically spaced base to apex
// (descending). Both endpoints are included.
std::vector<double> section_freqs(const CascadeConfig& cfg);

std::vector<CochleaSection> build_cascade(const CascadeConfig& cfg);

struct CascadeOutput {
    std::vector<double> freqs;  // per section, Hz
    // outputs[s][t]: section s's low-passed response at audio sample t
    std::vector<std::vector<std::complex<double>>> outputs;
};

CascadeOutput cascade_run(const CascadeConfig& cfg, std::span<const double> audio);

struct SweepResult {
    std::vector<double> freqs;       // probe Hz
    std::vector<double> amplitudes;  // input amplitudes
    // peak[f][a]: steady-state peak |output| at the best section
    std::vector<std::vector<double>> peak;
    std::vector<int> best_section;   // per probe, at the smallest amplitude
    std::vector<double> spread_db;   // per probe: max-min over amplitudes
};

// Runs a tone per (freq, amplitude) grid point, discards the first half of
// each run, and records the peak magnitude over the remaining window at the
// best-responding section. Grid points are independent, so they parallelize.
SweepResult gain_sweep(const CascadeConfig& cfg, std::span<const double> freqs,
                       std::span<const double> amplitudes, double duration,
                       int threads = 1);

// One LIF per section, driven by |section output| (identity projection).
struct LifEncoderResult {
    std::vector<SpikeEvent> spikes;   // neuron = section index
    std::vector<std::int64_t> per_section_counts;
    FixDiag diag;
};

LifEncoderResult lif_spike_encoder(const CascadeOutput& cascade, const LifParams& lif,
                                   const EngineFormats& formats);

}  // namespace resonet
