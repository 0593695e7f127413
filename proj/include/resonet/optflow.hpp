#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

#include "resonet/neuron.hpp"
#include "resonet/signal_io.hpp"

namespace resonet {

// Motion-energy filter bank. Defaults follow the reference parameter table:
// 64x64 receptive fields, 32 ms timesteps, one spatial frequency, five
// temporal frequencies, four orientations.
struct FilterBankSpec {
    int rf_h = 64;
    int rf_w = 64;
    double dt = 0.032;  // s per timestep
    std::vector<double> spatial_freqs = {6 * 3.14159265358979323846 / 256};  // rad/pix
    std::vector<double> temporal_freqs = {4 * 3.14159265358979323846 * 1,
                                          4 * 3.14159265358979323846 * 2,
                                          4 * 3.14159265358979323846 * 3,
                                          4 * 3.14159265358979323846 * 4,
                                          4 * 3.14159265358979323846 * 5};  // rad/s
    std::vector<double> orientations = {0, 3.14159265358979323846 / 4,
                                        3.14159265358979323846 / 2,
                                        3 * 3.14159265358979323846 / 4};
    // The receptive-field table does not pin sigma; rf/4 keeps the conjugate
    // (reverse-direction) lobe of the complex Gabor far enough below the
    // forward lobe for direction estimates to stay clean. See the README
    // sensitivity note before shrinking it.
    double gabor_sigma = 16.0;
    double rf_decay = 0.98;      // temporal RF decay per timestep
    double rf_threshold = 0.01;  // spikes-mode graded threshold
    double energy_floor = 0.262144;  // 1e-6 of max representable |z|^2 at 24/14

    void validate() const;
    int kernel_size() const;  // odd; even rf sizes round up to center a cell
};

struct ComplexImage {
    int width = 0;
    int height = 0;
    std::vector<std::complex<double>> px;
    std::size_t idx(int x, int y) const {
        return std::size_t(y) * std::size_t(width) + std::size_t(x);
    }
};

// kernel(p) = gauss(p) * (exp(i*omega_x*(p.n)) - dc) with n = (cos t, sin t);
// the dc term keeps the kernel sum at exactly 0+0i so static illumination
// cannot excite the bank.
ComplexImage gabor_kernel(double omega_x, double theta, double sigma, int size);

// Synop bookkeeping for the sparsity story: synops counts one weight
// application per (event, kernel cell, spatial filter); the dense equivalent
// charges every pixel every bin.
struct FlowDiagnostics {
    std::uint64_t synops = 0;
    std::uint64_t dense_synop_equiv = 0;
    std::uint64_t events_processed = 0;
    std::uint64_t events_dropped = 0;  // out-of-bounds
    std::uint64_t neuron_updates = 0;
    std::uint64_t spikes = 0;
    std::uint64_t saturations = 0;
};

// Event-wise spatial correlation: each event scatter-adds the flipped kernel
// around its pixel, so out[p] = sum_q kernel(q) * s(p + q - c). A single
// event at the image center leaves the flipped kernel in the map.
void spatial_stage(std::span<const DvsEvent> bin_events, const ComplexImage& kernel,
                   ComplexImage& out, FlowDiagnostics& diag);

// Dense variant for frame input delivered as per-pixel graded intensities.
void spatial_stage(const std::vector<double>& frame, int width, int height,
                   const ComplexImage& kernel, ComplexImage& out, FlowDiagnostics& diag);

enum class FlowReadout { Dense, Spikes };

// One opponent pair per (omega_x, omega_t, theta): the + neuron integrates
// conj(a), the - neuron integrates a, making them selective for motion along
// +v and -v respectively (both rotate clockwise; see omega_dt).
struct OpponentChannel {
    double omega_t = 0;
    double omega_dt = 0;  // -omega_t * dt; clockwise, so the graded-readout
                          // crossing happens on the positive real axis
    double vx = 0, vy = 0;  // preferred velocity of the + neuron, pix/s
    int width = 0, height = 0;
    std::vector<std::complex<double>> z_pos, z_neg;
    std::vector<double> r_pos, r_neg;              // spikes-mode held payloads
    std::vector<std::int64_t> last_spike_pos, last_spike_neg;
    // fixed-precision state mirrors (used when precision == Fixed)
    std::vector<RfStateX> zx_pos, zx_neg;
};

struct EnergyPair {
    std::vector<double> e_pos, e_neg;
};

void opponent_energy_step(OpponentChannel& ch, const ComplexImage& a,
                          const FilterBankSpec& bank, FlowReadout readout,
                          Precision precision, const EngineFormats& formats,
                          std::int64_t t, EnergyPair& out, FlowDiagnostics& diag);

// v = (omega_t / omega_x) * (cos theta, sin theta), pix/s.
struct Vec2 {
    double x = 0, y = 0;
};
Vec2 preferred_velocity(double omega_x, double omega_t, double theta);

// Per-channel energies with their signed preferred velocities; estimate_flow
// pools them per pixel: f = sum(v E+ + (-v) E-) / sum(E+ + E-).
struct ChannelEnergy {
    double vx = 0, vy = 0;
    const std::vector<double>* e_pos = nullptr;
    const std::vector<double>* e_neg = nullptr;
};

FlowField estimate_flow(std::span<const ChannelEnergy> channels, int width, int height,
                        double energy_floor);

struct AeeResult {
    double aee = 0;                  // mean endpoint error, displacement pixels
    double outlier_pct = 0;          // endpoint error > 3 px
    double mean_direction_err_deg = 0;
    std::size_t n = 0;
};

// Endpoint errors measured on displacements flow * dt_gt, restricted to
// pixels with mask != 0 (and valid in both fields).
AeeResult aee_metrics(const FlowField& est, const FlowField& gt,
                      std::span<const std::uint8_t> mask, double dt_gt);

// 1 inside the region where a centered kernel has full support, 0 on the rim.
std::vector<std::uint8_t> interior_mask(int width, int height, int margin);

struct FlowRunConfig {
    FilterBankSpec bank;
    FlowReadout readout = FlowReadout::Dense;
    Precision precision = Precision::Float;
    EngineFormats formats;
    int threads = 1;
    int average_last_bins = 1;  // energies averaged over the trailing bins
};

struct FlowRunResult {
    FlowField flow;
    FlowDiagnostics diag;
    std::vector<std::uint8_t> event_mask;  // pixels that saw any event
    int n_bins = 0;
    std::vector<std::int64_t> staleness;   // per-channel max readout age, spikes mode
};

FlowRunResult run_flow(const EventFile& events, const FlowRunConfig& cfg);

}  // namespace resonet
