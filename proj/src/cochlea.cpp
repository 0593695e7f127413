#include "resonet/cochlea.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "resonet/parallel.hpp"

namespace resonet {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

std::array<BiquadCoeffs, 3> design_butterworth6(double cutoff_rad_s, double sample_rate) {
    if (!(cutoff_rad_s > 0)) throw std::invalid_argument("design_butterworth6: cutoff must be positive");
    if (!(sample_rate > 0)) throw std::invalid_argument("design_butterworth6: sample_rate must be positive");
    double wd = cutoff_rad_s / sample_rate;  // rad/sample
    if (!(wd < kPi)) throw std::invalid_argument("design_butterworth6: cutoff at or above Nyquist");
    // Butterworth pole pairs: zeta_k = sin((2k-1)*pi/12), k = 1..3.
    // Prewarped bilinear transform puts the analog -3 dB point exactly at wd.
    double K = std::tan(wd / 2);
    std::array<BiquadCoeffs, 3> out;
    for (int k = 0; k < 3; ++k) {
        double zeta = std::sin((2 * k + 1) * kPi / 12);
        double norm = 1.0 / (1 + 2 * zeta * K + K * K);
        BiquadCoeffs& c = out[std::size_t(k)];
        c.b0 = K * K * norm;
        c.b1 = 2 * c.b0;
        c.b2 = c.b0;
        c.a1 = 2 * (K * K - 1) * norm;
        c.a2 = (1 - 2 * zeta * K + K * K) * norm;
    }
    return out;
}

double butterworth6_gain(const std::array<BiquadCoeffs, 3>& coeffs, double freq_hz,
                         double sample_rate) {
    double w = 2 * kPi * freq_hz / sample_rate;
    std::complex<double> z1(std::cos(-w), std::sin(-w));
    std::complex<double> z2 = z1 * z1;
    double g = 1.0;
    for (const BiquadCoeffs& c : coeffs) {
        std::complex<double> num = c.b0 + c.b1 * z1 + c.b2 * z2;
        std::complex<double> den = 1.0 + c.a1 * z1 + c.a2 * z2;
        g *= std::abs(num / den);
    }
    return g;
}

std::complex<double> CochleaSection::step(std::complex<double> input) {
    for (int k = 0; k < oversample; ++k) z = hopf_step(z, input, hopf);
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
        throw std::runtime_error("cochlea: section " + std::to_string(index) +
                                 " diverged (non-finite state); reduce input or |lambda|");
    return lpf.step(z);
}

void CochleaSection::reset() {
    z = {0, 0};
    lpf.reset();
}

void CascadeConfig::validate() const {
    if (!(f_lo > 0) || !(f_hi >= f_lo))
        throw std::invalid_argument("CascadeConfig: need 0 < f_lo <= f_hi");
    if (sections_per_octave < 1)
        throw std::invalid_argument("CascadeConfig: sections_per_octave must be >= 1");
    if (!(sample_rate > 0)) throw std::invalid_argument("CascadeConfig: sample_rate must be positive");
    if (!(1.05 * 2 * kPi * f_hi < kPi * sample_rate))
        throw std::invalid_argument("CascadeConfig: f_hi too close to Nyquist for the coupling filter");
    if (!(output_ceiling > 0))
        throw std::invalid_argument("CascadeConfig: output_ceiling must be positive");
}

std::vector<double> section_freqs(const CascadeConfig& cfg) {
    cfg.validate();
    if (cfg.f_hi == cfg.f_lo) return {cfg.f_hi};
    double octaves = std::log2(cfg.f_hi / cfg.f_lo);
    int n = int(std::lround(octaves * cfg.sections_per_octave)) + 1;
    n = std::max(n, 2);
    std::vector<double> freqs(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k)
        freqs[std::size_t(k)] = cfg.f_hi * std::pow(cfg.f_lo / cfg.f_hi, double(k) / (n - 1));
    return freqs;
}

std::vector<CochleaSection> build_cascade(const CascadeConfig& cfg) {
    std::vector<double> freqs = section_freqs(cfg);
    std::vector<CochleaSection> sections(freqs.size());
    for (std::size_t s = 0; s < freqs.size(); ++s) {
        CochleaSection& sec = sections[s];
        double w0 = 2 * kPi * freqs[s];
        sec.oversample = std::max(1, int(std::ceil(2 * w0 / cfg.sample_rate)));
        sec.hopf.omega0 = w0;
        sec.hopf.lambda = cfg.lambda;
        sec.hopf.dt = 1.0 / (cfg.sample_rate * sec.oversample);
        sec.hopf.validate();
        sec.lpf.re.fill(Biquad{});
        sec.lpf.im.fill(Biquad{});
        auto coeffs = design_butterworth6(1.05 * w0, cfg.sample_rate);
        for (int k = 0; k < 3; ++k) {
            sec.lpf.re[std::size_t(k)].c = coeffs[std::size_t(k)];
            sec.lpf.im[std::size_t(k)].c = coeffs[std::size_t(k)];
        }
        sec.index = int(s);
    }
    return sections;
}

CascadeOutput cascade_run(const CascadeConfig& cfg, std::span<const double> audio) {
    std::vector<CochleaSection> sections = build_cascade(cfg);
    CascadeOutput out;
    out.freqs = section_freqs(cfg);
    out.outputs.assign(sections.size(), std::vector<std::complex<double>>(audio.size()));
    for (std::size_t t = 0; t < audio.size(); ++t) {
        std::complex<double> x(audio[t], 0.0);
        for (std::size_t s = 0; s < sections.size(); ++s) {
            x = sections[s].step(x);
            if (std::abs(x) > cfg.output_ceiling)
                throw std::runtime_error("cochlea: section " + std::to_string(s) +
                                         " exceeded the output ceiling at sample " +
                                         std::to_string(t));
            out.outputs[s][t] = x;
        }
    }
    return out;
}

SweepResult gain_sweep(const CascadeConfig& cfg, std::span<const double> freqs,
                       std::span<const double> amplitudes, double duration, int threads) {
    cfg.validate();
    if (freqs.empty() || amplitudes.empty())
        throw std::invalid_argument("gain_sweep: need at least one freq and amplitude");
    if (!(duration > 0)) throw std::invalid_argument("gain_sweep: duration must be positive");

    std::size_t nf = freqs.size(), na = amplitudes.size();
    std::size_t n_samples = std::size_t(std::llround(duration * cfg.sample_rate));
    std::size_t tail_start = n_samples / 2;

    // peaks[f*na + a]: per grid point, per section, steady-state peak |output|.
    std::vector<std::vector<double>> peaks(nf * na);
    parallel_chunks(nf * na, threads, [&](std::size_t lo, std::size_t hi) {
        std::vector<double> tone(n_samples);
        for (std::size_t g = lo; g < hi; ++g) {
            double f = freqs[g / na];
            double amp = amplitudes[g % na];
            for (std::size_t t = 0; t < n_samples; ++t)
                tone[t] = amp * std::sin(2 * kPi * f * double(t) / cfg.sample_rate);
            CascadeOutput run = cascade_run(cfg, tone);
            std::vector<double>& pk = peaks[g];
            pk.assign(run.outputs.size(), 0.0);
            for (std::size_t s = 0; s < run.outputs.size(); ++s)
                for (std::size_t t = tail_start; t < n_samples; ++t)
                    pk[s] = std::max(pk[s], std::abs(run.outputs[s][t]));
        }
    });

    SweepResult res;
    res.freqs.assign(freqs.begin(), freqs.end());
    res.amplitudes.assign(amplitudes.begin(), amplitudes.end());
    res.peak.assign(nf, std::vector<double>(na, 0.0));
    res.best_section.resize(nf);
    res.spread_db.resize(nf);
    // The best-responding section is resolved at the SMALLEST amplitude:
    // tuning is sharpest there, while at strong drive compression caps the
    // on-place response and the raw peak migrates toward the base.
    std::size_t a_bot = 0;
    for (std::size_t a = 1; a < na; ++a)
        if (amplitudes[a] < amplitudes[a_bot]) a_bot = a;
    for (std::size_t fi = 0; fi < nf; ++fi) {
        const std::vector<double>& bot = peaks[fi * na + a_bot];
        std::size_t best = 0;
        for (std::size_t s = 1; s < bot.size(); ++s)
            if (bot[s] > bot[best]) best = s;
        res.best_section[fi] = int(best);
        double lo_db = 0, hi_db = 0;
        for (std::size_t a = 0; a < na; ++a) {
            double p = peaks[fi * na + a][best];
            res.peak[fi][a] = p;
            double db = 20 * std::log10(std::max(p, 1e-300));
            if (a == 0 || db < lo_db) lo_db = db;
            if (a == 0 || db > hi_db) hi_db = db;
        }
        res.spread_db[fi] = hi_db - lo_db;
    }
    return res;
}

LifEncoderResult lif_spike_encoder(const CascadeOutput& cascade, const LifParams& lif,
                                   const EngineFormats& formats) {
    lif.validate();
    formats.validate();
    LifEncoderResult res;
    LifParamsFx px = compile_lif(lif, formats);
    res.per_section_counts.assign(cascade.outputs.size(), 0);
    for (std::size_t s = 0; s < cascade.outputs.size(); ++s) {
        LifStateX st;
        const auto& trace = cascade.outputs[s];
        for (std::size_t t = 0; t < trace.size(); ++t) {
            std::int64_t a = fx_quantize(std::abs(trace[t]), formats.state, &res.diag);
            if (lif_step(st, a, px, formats, res.diag)) {
                res.spikes.push_back(SpikeEvent{std::int64_t(t), std::int32_t(s), 1.0, false});
                ++res.per_section_counts[s];
            }
        }
    }
    return res;
}

}  // namespace resonet
