#include "resonet/neuron.hpp"

#include <algorithm>
#include <bit>
#include <numeric>

namespace resonet {

bool lif_step(LifStateF& s, double a, const LifParams& p) {
    s.u = p.decay_u * s.u + a;
    s.v = p.decay_v * s.v + s.u;
    if (s.v > p.threshold) {
        s.v = 0;
        return true;
    }
    return false;
}

LifParamsFx compile_lif(const LifParams& p, const EngineFormats& f) {
    p.validate();
    f.validate();
    LifParamsFx c;
    c.decay_u = fx_quantize_trunc(p.decay_u, f.coeff);
    c.decay_v = fx_quantize_trunc(p.decay_v, f.coeff);
    c.threshold = fx_quantize(p.threshold, f.state);
    return c;
}

bool lif_step(LifStateX& s, std::int64_t a_raw, const LifParamsFx& p,
              const EngineFormats& f, FixDiag& diag) {
    int from = f.coeff.frac_bits + f.state.frac_bits;
    std::int64_t u_w = fx_rescale_trunc(p.decay_u * s.u, from, f.state.frac_bits);
    s.u = fx_saturate(u_w + a_raw, f.state, &diag);
    std::int64_t v_w = fx_rescale_trunc(p.decay_v * s.v, from, f.state.frac_bits);
    s.v = fx_saturate(v_w + s.u, f.state, &diag);
    if (s.v > p.threshold) {
        s.v = 0;
        return true;
    }
    return false;
}

std::optional<double> rf_step(RfStateF& s, std::complex<double> a, const RfParams& p) {
    double im_prev = s.z.imag();
    s.z = p.rotation() * s.z + a;
    if (im_prev > 0 && s.z.imag() <= 0 && s.z.real() > p.threshold)
        return s.z.real();
    return std::nullopt;
}

bool rf_reset_step(RfStateF& s, std::complex<double> a, const RfParams& p) {
    s.z = p.rotation() * s.z + a;
    if (s.z.imag() > p.threshold) {
        s.z.real(0);
        return true;
    }
    return false;
}

RfParamsFx compile_rf(const RfParams& p, const EngineFormats& f) {
    p.validate();
    f.validate();
    RfParamsFx c;
    // Truncating toward zero keeps |rotation| <= decay < 1, so every fixed
    // step strictly contracts and a silent bank cannot self-oscillate.
    c.rotation.re = fx_quantize_trunc(p.decay * std::cos(p.omega_dt), f.coeff);
    c.rotation.im = fx_quantize_trunc(p.decay * std::sin(p.omega_dt), f.coeff);
    c.threshold = fx_quantize(p.threshold, f.state);
    c.output = p.output;
    return c;
}

std::optional<std::int64_t> rf_step(RfStateX& s, const FixedComplex& a, const RfParamsFx& p,
                                    const EngineFormats& f, FixDiag& diag) {
    std::int64_t im_prev = s.z.im;
    s.z = fx_rotate_add(s.z, f.state, p.rotation, f.coeff, a, &diag);
    if (im_prev > 0 && s.z.im <= 0 && s.z.re > p.threshold)
        return s.z.re;
    return std::nullopt;
}

bool rf_reset_step(RfStateX& s, const FixedComplex& a, const RfParamsFx& p,
                   const EngineFormats& f, FixDiag& diag) {
    s.z = fx_rotate_add(s.z, f.state, p.rotation, f.coeff, a, &diag);
    if (s.z.im > p.threshold) {
        s.z.re = 0;
        return true;
    }
    return false;
}

namespace {

inline std::complex<double> hopf_deriv(std::complex<double> z, std::complex<double> a,
                                       const HopfParams& p) {
    std::complex<double> gain(p.lambda - std::norm(z), 1.0);
    return p.omega0 * (gain * z + a);
}

}  // namespace

std::complex<double> hopf_step(std::complex<double> z, std::complex<double> a,
                               const HopfParams& p) {
    std::complex<double> k1 = hopf_deriv(z, a, p);
    std::complex<double> k2 = hopf_deriv(z + 0.5 * p.dt * k1, a, p);
    std::complex<double> k3 = hopf_deriv(z + 0.5 * p.dt * k2, a, p);
    std::complex<double> k4 = hopf_deriv(z + p.dt * k3, a, p);
    return z + (p.dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

FixedComplex hopf_step(const FixedComplex& z, const FixedComplex& a, const HopfParams& p,
                       const EngineFormats& f, FixDiag& diag) {
    auto grid = [&](std::complex<double> v) -> FixedComplex {
        return {fx_quantize_trunc(v.real(), f.state, &diag),
                fx_quantize_trunc(v.imag(), f.state, &diag)};
    };
    auto val = [&](const FixedComplex& v) -> std::complex<double> {
        return {fx_value(v.re, f.state), fx_value(v.im, f.state)};
    };
    std::complex<double> z0 = val(z);
    std::complex<double> ain = val(a);
    // Stage states live on the state grid; derivatives are evaluated from the
    // quantized points so the trajectory is reproducible bit for bit.
    std::complex<double> k1 = hopf_deriv(z0, ain, p);
    std::complex<double> z1 = val(grid(z0 + 0.5 * p.dt * k1));
    std::complex<double> k2 = hopf_deriv(z1, ain, p);
    std::complex<double> z2 = val(grid(z0 + 0.5 * p.dt * k2));
    std::complex<double> k3 = hopf_deriv(z2, ain, p);
    std::complex<double> z3 = val(grid(z0 + p.dt * k3));
    std::complex<double> k4 = hopf_deriv(z3, ain, p);
    return grid(z0 + (p.dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4));
}

SynapseMap::SynapseMap(int n_sources, int n_targets)
    : n_sources_(n_sources), n_targets_(n_targets), per_source_(std::size_t(n_sources)) {
    if (n_sources < 0 || n_targets < 0)
        throw std::invalid_argument("SynapseMap: negative dimension");
}

void SynapseMap::add_edge(int source, int target, std::complex<double> weight) {
    if (source < 0 || source >= n_sources_)
        throw std::out_of_range("SynapseMap::add_edge: source out of range");
    if (target < 0 || target >= n_targets_)
        throw std::out_of_range("SynapseMap::add_edge: target out of range");
    per_source_[std::size_t(source)].push_back({target, weight});
}

namespace {

// Canonical event order: summation happens in a fixed order regardless of how
// the caller interleaved per-neuron streams, so float accumulation is
// permutation-invariant bit for bit.
std::vector<std::size_t> canonical_order(std::span<const SpikeEvent> events, std::int64_t t,
                                         int n_sources) {
    std::vector<std::size_t> idx(events.size());
    std::iota(idx.begin(), idx.end(), std::size_t(0));
    for (const SpikeEvent& e : events) {
        if (e.t != t - 1)
            throw std::invalid_argument("SynapseMap::accumulate: event not from step t-1");
        if (e.neuron < 0 || e.neuron >= n_sources)
            throw std::out_of_range("SynapseMap::accumulate: unknown source neuron");
    }
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        if (events[a].neuron != events[b].neuron) return events[a].neuron < events[b].neuron;
        return std::bit_cast<std::uint64_t>(events[a].payload) <
               std::bit_cast<std::uint64_t>(events[b].payload);
    });
    return idx;
}

}  // namespace

void SynapseMap::accumulate(std::span<const SpikeEvent> events, std::int64_t t,
                            std::vector<std::complex<double>>& out) const {
    out.assign(std::size_t(n_targets_), {0, 0});
    for (std::size_t i : canonical_order(events, t, n_sources_)) {
        const SpikeEvent& e = events[i];
        for (const Edge& edge : per_source_[std::size_t(e.neuron)])
            out[std::size_t(edge.target)] += edge.w * e.payload;
    }
}

void SynapseMap::accumulate(std::span<const SpikeEvent> events, std::int64_t t,
                            const EngineFormats& f, std::vector<FixedComplex>& out,
                            FixDiag& diag) const {
    std::vector<FixedComplex> wide(static_cast<std::size_t>(n_targets_));
    for (std::size_t i : canonical_order(events, t, n_sources_)) {
        const SpikeEvent& e = events[i];
        // Payloads originate on the state grid, so this quantization is exact.
        std::int64_t pay = fx_quantize(e.payload, f.state, nullptr);
        for (const Edge& edge : per_source_[std::size_t(e.neuron)]) {
            std::int64_t wr = fx_quantize_trunc(edge.w.real(), f.coeff);
            std::int64_t wi = fx_quantize_trunc(edge.w.imag(), f.coeff);
            wide[std::size_t(edge.target)].re += wr * pay;
            wide[std::size_t(edge.target)].im += wi * pay;
        }
    }
    out.assign(std::size_t(n_targets_), {0, 0});
    int from = f.coeff.frac_bits + f.state.frac_bits;
    for (std::size_t k = 0; k < wide.size(); ++k) {
        out[k].re = fx_saturate(fx_rescale_trunc(wide[k].re, from, f.state.frac_bits),
                                f.state, &diag);
        out[k].im = fx_saturate(fx_rescale_trunc(wide[k].im, from, f.state.frac_bits),
                                f.state, &diag);
    }
}

}  // namespace resonet
