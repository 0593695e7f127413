#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <limits>
#include <vector>

#include "resonet/cochlea.hpp"

using namespace resonet;

namespace {

const double kPi = 3.14159265358979323846;

CascadeConfig two_octaves(int spo = 6, double lambda = -0.01) {
    CascadeConfig cfg;
    cfg.f_hi = 4000;
    cfg.f_lo = 1000;
    cfg.sections_per_octave = spo;
    cfg.lambda = lambda;
    cfg.sample_rate = 16000;
    return cfg;
}

std::vector<double> tone(double freq, double amp, double duration, double fs) {
    std::vector<double> s(std::size_t(std::llround(duration * fs)));
    for (std::size_t t = 0; t < s.size(); ++t)
        s[t] = amp * std::sin(2 * kPi * freq * double(t) / fs);
    return s;
}

}  // namespace

TEST_CASE("section frequencies are geometric, base to apex") {
    CascadeConfig cfg = two_octaves();
    std::vector<double> f = section_freqs(cfg);
    REQUIRE(f.size() == 13);  // 2 octaves * 6 per octave + 1
    CHECK(f.front() == doctest::Approx(4000.0));
    CHECK(f.back() == doctest::Approx(1000.0));
    for (std::size_t k = 1; k < f.size(); ++k)
        CHECK(f[k] / f[k - 1] == doctest::Approx(std::pow(0.5, 1.0 / 6)).epsilon(1e-12));

    cfg.f_lo = cfg.f_hi;
    f = section_freqs(cfg);
    REQUIRE(f.size() == 1);
    CHECK(f[0] == doctest::Approx(4000.0));
}

TEST_CASE("config validation rejects broken cascades") {
    CascadeConfig cfg = two_octaves();
    CHECK_NOTHROW(cfg.validate());

    CascadeConfig bad = cfg;
    bad.f_lo = 0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

    bad = cfg;
    bad.f_lo = 5000;  // above f_hi
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

    bad = cfg;
    bad.sections_per_octave = 0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

    bad = cfg;
    bad.f_hi = 7800;  // coupling cutoff would cross Nyquist
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

    bad = cfg;
    bad.output_ceiling = 0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

    CHECK_THROWS_AS(design_butterworth6(0.0, 16000), std::invalid_argument);
    CHECK_THROWS_AS(design_butterworth6(2 * kPi * 9000, 16000), std::invalid_argument);
}

TEST_CASE("coupling filter hits the textbook butterworth landmarks") {
    // high fs/fc keeps bilinear warping out of the octave above cutoff
    // (at fs/fc = 16 the warp already drags 2fc to -38 dB)
    double fc = 1000.0, fs = 48000.0;
    auto coeffs = design_butterworth6(2 * kPi * fc, fs);

    double dc = butterworth6_gain(coeffs, 0.0, fs);
    CHECK(std::abs(20 * std::log10(dc)) < 1e-9);

    double at_fc = 20 * std::log10(butterworth6_gain(coeffs, fc, fs));
    CHECK(std::abs(at_fc + 3.0103) < 0.1);  // half-power point

    double at_2fc = 20 * std::log10(butterworth6_gain(coeffs, 2 * fc, fs));
    CHECK(std::abs(at_2fc + 36.0) < 1.0);  // 6 dB/octave per order

    // monotone low-pass up to Nyquist, also in the cochlea's own regime
    for (double rate : {48000.0, 16000.0}) {
        auto cs = design_butterworth6(2 * kPi * fc, rate);
        double prev = butterworth6_gain(cs, 0.0, rate);
        for (double f = 100; f < rate / 2; f += 100) {
            double g = butterworth6_gain(cs, f, rate);
            CHECK(g <= prev + 1e-12);
            prev = g;
        }
    }
}

TEST_CASE("supercritical resonator settles on the root-lambda orbit") {
    for (double lam : {0.01, 0.04, 0.09}) {
        HopfParams p;
        p.omega0 = 2 * kPi * 1000;
        p.dt = 0.01 / p.omega0;
        p.lambda = lam;
        std::complex<double> z(0.01, 0.0);
        for (int s = 0; s < 100000; ++s) z = hopf_step(z, {0, 0}, p);
        CHECK(std::abs(z) == doctest::Approx(std::sqrt(lam)).epsilon(0.01));

        // the orbit rotates: phase keeps advancing once settled
        std::complex<double> z2 = hopf_step(z, {0, 0}, p);
        double dphase = std::arg(z2 / z);
        CHECK(dphase > 0.5 * p.dt * p.omega0);
        CHECK(dphase < 2.0 * p.dt * p.omega0);
    }
}

TEST_CASE("subcritical resonator decays to rest") {
    HopfParams p;
    p.omega0 = 2 * kPi * 1000;
    p.dt = 0.01 / p.omega0;
    p.lambda = -0.05;
    std::complex<double> z(0.3, 0.0);
    for (int s = 0; s < 100000; ++s) z = hopf_step(z, {0, 0}, p);
    CHECK(std::abs(z) < 1e-6);
}

TEST_CASE("response at the characteristic frequency compresses") {
    // single section driven at CF: the cube-root branch gives a log-log
    // slope near 1/3 per decade of drive
    CascadeConfig cfg = two_octaves();
    cfg.f_hi = cfg.f_lo = 1000;
    std::vector<double> amps = {1e-2, 1e-1};
    std::vector<double> probes = {1000.0};
    SweepResult r = gain_sweep(cfg, probes, amps, 0.5, 1);
    double slope = std::log10(r.peak[0][1] / r.peak[0][0]);
    CHECK(slope > 0.25);
    CHECK(slope < 0.8);
}

TEST_CASE("near-critical tuning amplifies weak inputs") {
    std::vector<double> probes = {1000.0};
    std::vector<double> amps = {1e-5};
    CascadeConfig active = two_octaves();
    active.f_hi = active.f_lo = 1000;
    active.lambda = -0.01;
    CascadeConfig passive = active;
    passive.lambda = -0.5;
    double g_active = gain_sweep(active, probes, amps, 0.5, 1).peak[0][0];
    double g_passive = gain_sweep(passive, probes, amps, 0.5, 1).peak[0][0];
    CHECK(g_active > 10 * g_passive);  // measured ~40x
}

TEST_CASE("cascade normalizes level and density beats a sparse cascade") {
    // 40 dB of input range; probes sit in the lower octave so every tone
    // passes several compressive sections before its place
    std::vector<double> amps = {3.16e-3, 3.16e-2, 0.316};
    std::vector<double> probes(4);
    for (int i = 0; i < 4; ++i)
        probes[std::size_t(i)] = 1000.0 * std::pow(1.782, double(i) / 3.0);

    SweepResult dense = gain_sweep(two_octaves(6), probes, amps, 0.25, 1);
    SweepResult sparse = gain_sweep(two_octaves(2), probes, amps, 0.25, 1);

    double worst_dense = 0, worst_sparse = 0;
    for (double s : dense.spread_db) {
        CHECK(s < 4.0);
        worst_dense = std::max(worst_dense, s);
    }
    for (double s : sparse.spread_db) worst_sparse = std::max(worst_sparse, s);
    CHECK(worst_sparse > worst_dense);
}

TEST_CASE("tonotopy: tones peak at their place in the cascade") {
    CascadeConfig cfg = two_octaves();
    std::vector<double> probes = {3000.0, 1100.0};
    std::vector<double> amps = {1e-3};
    SweepResult r = gain_sweep(cfg, probes, amps, 0.25, 1);
    std::vector<double> cfs = section_freqs(cfg);

    CHECK(r.best_section[0] < r.best_section[1]);  // high freq near the base
    for (std::size_t f = 0; f < probes.size(); ++f) {
        double cf = cfs[std::size_t(r.best_section[f])];
        CHECK(std::abs(cf - probes[f]) / probes[f] < 0.12);
    }
}

TEST_CASE("sweep grid is thread-count invariant") {
    std::vector<double> amps = {1e-3, 1e-2};
    std::vector<double> probes = {1200.0, 1600.0, 2000.0};
    CascadeConfig cfg = two_octaves();
    SweepResult a = gain_sweep(cfg, probes, amps, 0.2, 1);
    SweepResult b = gain_sweep(cfg, probes, amps, 0.2, 3);
    for (std::size_t f = 0; f < probes.size(); ++f) {
        CHECK(a.best_section[f] == b.best_section[f]);
        for (std::size_t k = 0; k < amps.size(); ++k) CHECK(a.peak[f][k] == b.peak[f][k]);
    }
}

TEST_CASE("sweep argument validation") {
    CascadeConfig cfg = two_octaves();
    std::vector<double> amps = {1e-3};
    std::vector<double> none;
    CHECK_THROWS_AS(gain_sweep(cfg, none, amps, 0.2, 1), std::invalid_argument);
    CHECK_THROWS_AS(gain_sweep(cfg, amps, none, 0.2, 1), std::invalid_argument);
    std::vector<double> probes = {1000.0};
    CHECK_THROWS_AS(gain_sweep(cfg, probes, amps, 0.0, 1), std::invalid_argument);
}

TEST_CASE("runaway output reports the failing section and sample") {
    CascadeConfig cfg = two_octaves();
    cfg.output_ceiling = 1e-6;
    std::vector<double> audio = tone(1000, 0.1, 0.05, cfg.sample_rate);
    try {
        cascade_run(cfg, audio);
        FAIL("expected the ceiling to trip");
    } catch (const std::runtime_error& e) {
        std::string msg = e.what();
        CHECK(msg.find("section") != std::string::npos);
        CHECK(msg.find("sample") != std::string::npos);
        CHECK(msg.find("ceiling") != std::string::npos);
    }
}

TEST_CASE("non-finite state names the diverged section") {
    CascadeConfig cfg = two_octaves();
    std::vector<double> audio = {std::numeric_limits<double>::quiet_NaN()};
    try {
        cascade_run(cfg, audio);
        FAIL("expected divergence");
    } catch (const std::runtime_error& e) {
        std::string msg = e.what();
        CHECK(msg.find("section 0") != std::string::npos);
        CHECK(msg.find("diverged") != std::string::npos);
    }
}

TEST_CASE("spike encoder counts follow drive level") {
    CascadeConfig cfg = two_octaves();
    EngineFormats fmts;
    LifParams lif;
    lif.decay_u = 0.5;
    lif.decay_v = 0.5;
    lif.threshold = 1.0;

    CascadeOutput quiet = cascade_run(cfg, tone(1414, 1e-3, 0.1, cfg.sample_rate));
    CascadeOutput loud = cascade_run(cfg, tone(1414, 1e-1, 0.1, cfg.sample_rate));
    LifEncoderResult rq = lif_spike_encoder(quiet, lif, fmts);
    LifEncoderResult rl = lif_spike_encoder(loud, lif, fmts);

    CHECK(rq.spikes.size() > 0);
    CHECK(rl.spikes.size() > rq.spikes.size());

    std::int64_t total = 0;
    for (std::int64_t c : rl.per_section_counts) total += c;
    CHECK(std::size_t(total) == rl.spikes.size());
    for (const SpikeEvent& e : rl.spikes) {
        CHECK(e.neuron >= 0);
        CHECK(std::size_t(e.neuron) < quiet.outputs.size());
    }
    CHECK(rl.diag.saturations == 0);

    // reruns are bit-identical
    LifEncoderResult again = lif_spike_encoder(loud, lif, fmts);
    REQUIRE(again.spikes.size() == rl.spikes.size());
    bool same = true;
    for (std::size_t i = 0; i < again.spikes.size(); ++i)
        same = same && again.spikes[i].t == rl.spikes[i].t &&
               again.spikes[i].neuron == rl.spikes[i].neuron;
    CHECK(same);
}
