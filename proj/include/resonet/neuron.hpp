#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "resonet/fixed.hpp"

namespace resonet {

enum class Precision { Float, Fixed };

// State and coefficient formats used by a fixed-point run. Graded spike
// payloads travel in the state format.
struct EngineFormats {
    FixedFormat state{24, 14};
    FixedFormat coeff{16, 15};
    void validate() const {
        state.validate();
        coeff.validate();
    }
};

// One spike on the shared event bus. `payload` is 1.0 for unary spikes; for
// graded spikes it carries the quantized magnitude (exact in a double).
struct SpikeEvent {
    std::int64_t t = 0;
    std::int32_t neuron = 0;
    double payload = 1.0;
    bool graded = false;
};

// ---------------------------------------------------------------------------
// Leaky integrate-and-fire: u' = du*u + a; v' = dv*v + u'; spike and v=0 when
// v' crosses threshold.

struct LifParams {
    double decay_u = 0.9;
    double decay_v = 0.9;
    double threshold = 1.0;
    void validate() const {
        if (!(decay_u >= 0 && decay_u <= 1) || !(decay_v >= 0 && decay_v <= 1))
            throw std::invalid_argument("LifParams: decays must lie in [0,1]");
        if (!(threshold > 0))
            throw std::invalid_argument("LifParams: threshold must be positive");
    }
};

struct LifStateF {
    double u = 0;
    double v = 0;
};

bool lif_step(LifStateF& s, double a, const LifParams& p);

struct LifParamsFx {
    std::int64_t decay_u = 0;
    std::int64_t decay_v = 0;
    std::int64_t threshold = 0;
};

LifParamsFx compile_lif(const LifParams& p, const EngineFormats& f);

struct LifStateX {
    std::int64_t u = 0;
    std::int64_t v = 0;
};

bool lif_step(LifStateX& s, std::int64_t a_raw, const LifParamsFx& p,
              const EngineFormats& f, FixDiag& diag);

// ---------------------------------------------------------------------------
// Resonate-and-fire: z' = decay * e^{i*omega_dt} * z + a. Two readouts:
//   GradedMagnitude: when the phasor crosses the positive real axis downward
//     (im goes + -> <=0) and re exceeds threshold, emit re(z') as a graded
//     payload. No reset; the oscillation itself carries the state.
//   UnaryReset: when im(z') exceeds threshold, emit a unary spike and zero
//     re(z'), pushing the phase away from the firing condition.

enum class RfOutput { GradedMagnitude, UnaryReset };

struct RfParams {
    double decay = 0.95;
    double omega_dt = 0.3;  // radians advanced per step
    double threshold = 0.1;
    RfOutput output = RfOutput::GradedMagnitude;
    void validate() const {
        if (!(decay > 0 && decay < 1))
            throw std::invalid_argument("RfParams: decay must lie strictly inside (0,1)");
        if (!(threshold >= 0))
            throw std::invalid_argument("RfParams: threshold must be >= 0");
    }
    std::complex<double> rotation() const {
        return decay * std::complex<double>(std::cos(omega_dt), std::sin(omega_dt));
    }
};

struct RfStateF {
    std::complex<double> z{0, 0};
};

// Returns the graded payload if this step fired (GradedMagnitude mode).
std::optional<double> rf_step(RfStateF& s, std::complex<double> a, const RfParams& p);

// UnaryReset mode; returns true if the step fired.
bool rf_reset_step(RfStateF& s, std::complex<double> a, const RfParams& p);

struct RfParamsFx {
    FixedComplex rotation;  // coeff format, truncated so |rot| <= decay
    std::int64_t threshold = 0;
    RfOutput output = RfOutput::GradedMagnitude;
};

RfParamsFx compile_rf(const RfParams& p, const EngineFormats& f);

struct RfStateX {
    FixedComplex z;
};

std::optional<std::int64_t> rf_step(RfStateX& s, const FixedComplex& a, const RfParamsFx& p,
                                    const EngineFormats& f, FixDiag& diag);
bool rf_reset_step(RfStateX& s, const FixedComplex& a, const RfParamsFx& p,
                   const EngineFormats& f, FixDiag& diag);

// ---------------------------------------------------------------------------
// Hopf normal form: dz/dt = omega0 * ((lambda - |z|^2 + i) z + a), integrated
// with one classical RK4 step per call. Near the bifurcation (lambda ~ 0) the
// gain is strongly compressive, which is what the cochlea cascade exploits.

struct HopfParams {
    double omega0 = 2 * 3.14159265358979323846 * 1000;  // rad/s
    double lambda = -0.05;
    double dt = 1.0 / 16000;
    void validate() const {
        if (!(omega0 > 0)) throw std::invalid_argument("HopfParams: omega0 must be positive");
        if (!(dt > 0)) throw std::invalid_argument("HopfParams: dt must be positive");
        if (omega0 * dt > 0.5 + 1e-12)
            throw std::invalid_argument("HopfParams: dt*omega0 > 0.5; reduce dt or oversample");
    }
};

std::complex<double> hopf_step(std::complex<double> z, std::complex<double> a,
                               const HopfParams& p);

// Fixed-point variant: every RK4 stage is quantized to the state grid, the
// final combination once more. Input a is taken in the state format.
FixedComplex hopf_step(const FixedComplex& z, const FixedComplex& a, const HopfParams& p,
                       const EngineFormats& f, FixDiag& diag);

// ---------------------------------------------------------------------------
// Synaptic accumulation: a_i[t] = sum_j w_ij * payload_j over spikes from
// step t-1. Weights are complex; unary spikes contribute w_ij directly.

class SynapseMap {
  public:
    SynapseMap(int n_sources, int n_targets);

    void add_edge(int source, int target, std::complex<double> weight);

    int n_sources() const { return n_sources_; }
    int n_targets() const { return n_targets_; }

    // Float mode. `events` must all carry timestamp t-1; violations throw.
    // The result is independent of the order of `events`.
    void accumulate(std::span<const SpikeEvent> events, std::int64_t t,
                    std::vector<std::complex<double>>& out) const;

    // Fixed mode: weights quantized to coeff format, payloads to state format,
    // products accumulated at full precision in 64-bit and saturated once per
    // target at the end.
    void accumulate(std::span<const SpikeEvent> events, std::int64_t t,
                    const EngineFormats& f, std::vector<FixedComplex>& out,
                    FixDiag& diag) const;

  private:
    struct Edge {
        int target;
        std::complex<double> w;
    };
    int n_sources_;
    int n_targets_;
    std::vector<std::vector<Edge>> per_source_;
};

}  // namespace resonet
