#include "resonet/optflow.hpp"

#include <algorithm>
#include <cmath>

#include "resonet/parallel.hpp"

namespace resonet {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

void FilterBankSpec::validate() const {
    if (rf_h < 1 || rf_w < 1) throw std::invalid_argument("FilterBankSpec: rf size must be >= 1");
    if (!(dt > 0)) throw std::invalid_argument("FilterBankSpec: dt must be positive");
    if (spatial_freqs.empty() || temporal_freqs.empty() || orientations.empty())
        throw std::invalid_argument("FilterBankSpec: frequency/orientation lists must be nonempty");
    for (double w : spatial_freqs)
        if (!(w > 0)) throw std::invalid_argument("FilterBankSpec: spatial freqs must be positive");
    if (!(gabor_sigma > 0)) throw std::invalid_argument("FilterBankSpec: gabor_sigma must be positive");
    if (!(rf_decay > 0 && rf_decay < 1))
        throw std::invalid_argument("FilterBankSpec: rf_decay must lie strictly inside (0,1)");
    if (!(energy_floor > 0)) throw std::invalid_argument("FilterBankSpec: energy_floor must be positive");
    for (double wt : temporal_freqs)
        if (!(std::abs(wt) * dt < kPi))
            throw std::invalid_argument("FilterBankSpec: |omega_t|*dt must stay below pi");
}

int FilterBankSpec::kernel_size() const {
    int s = std::max(rf_h, rf_w);
    return (s % 2 == 0) ? s + 1 : s;
}

ComplexImage gabor_kernel(double omega_x, double theta, double sigma, int size) {
    if (!(sigma > 0)) throw std::invalid_argument("gabor_kernel: sigma must be positive");
    if (size <= 0 || size % 2 == 0)
        throw std::invalid_argument("gabor_kernel: size must be odd and positive");
    ComplexImage k;
    k.width = k.height = size;
    k.px.resize(std::size_t(size) * std::size_t(size));
    int c = size / 2;
    double nx = std::cos(theta), ny = std::sin(theta);
    double inv2s2 = 1.0 / (2 * sigma * sigma);

    std::complex<double> carrier_sum{0, 0};
    double env_sum = 0;
    for (int y = 0; y < size; ++y) {
        for (int x = 0; x < size; ++x) {
            double dx = x - c, dy = y - c;
            double g = std::exp(-(dx * dx + dy * dy) * inv2s2);
            double u = dx * nx + dy * ny;
            std::complex<double> e(std::cos(omega_x * u), std::sin(omega_x * u));
            k.px[k.idx(x, y)] = g * e;
            carrier_sum += g * e;
            env_sum += g;
        }
    }
    // Remove the envelope-shaped DC component so the kernel sums to zero and
    // uniform illumination cannot drive the bank.
    std::complex<double> dc = carrier_sum / env_sum;
    for (int y = 0; y < size; ++y) {
        for (int x = 0; x < size; ++x) {
            double dx = x - c, dy = y - c;
            double g = std::exp(-(dx * dx + dy * dy) * inv2s2);
            k.px[k.idx(x, y)] -= g * dc;
        }
    }
    return k;
}

void spatial_stage(std::span<const DvsEvent> bin_events, const ComplexImage& kernel,
                   ComplexImage& out, FlowDiagnostics& diag) {
    if (out.width <= 0 || out.height <= 0 || out.px.size() != std::size_t(out.width) * std::size_t(out.height))
        throw std::invalid_argument("spatial_stage: output map not allocated");
    if (kernel.width != kernel.height || kernel.width % 2 == 0)
        throw std::invalid_argument("spatial_stage: kernel must be odd and square");
    std::fill(out.px.begin(), out.px.end(), std::complex<double>{0, 0});
    int K = kernel.width;
    int c = K / 2;
    int W = out.width, H = out.height;
    std::uint64_t support = std::uint64_t(K) * std::uint64_t(K);

    for (const DvsEvent& e : bin_events) {
        if (e.x >= W || e.y >= H) {
            ++diag.events_dropped;
            continue;
        }
        ++diag.events_processed;
        diag.synops += support;
        int x0 = int(e.x) - c, y0 = int(e.y) - c;
        int dy0 = std::max(0, -y0), dy1 = std::min(K, H - y0);
        int dx0 = std::max(0, -x0), dx1 = std::min(K, W - x0);
        double pol = double(e.polarity);
        for (int dy = dy0; dy < dy1; ++dy) {
            // Correlation via scatter of the point-reflected kernel:
            // out[p] += pol * kernel(c - (p - e)).
            const std::complex<double>* krow = &kernel.px[kernel.idx(0, K - 1 - dy)];
            std::complex<double>* orow = &out.px[out.idx(x0 + dx0, y0 + dy)];
            if (pol > 0) {
                for (int dx = dx0; dx < dx1; ++dx) orow[dx - dx0] += krow[K - 1 - dx];
            } else {
                for (int dx = dx0; dx < dx1; ++dx) orow[dx - dx0] -= krow[K - 1 - dx];
            }
        }
    }
}

void spatial_stage(const std::vector<double>& frame, int width, int height,
                   const ComplexImage& kernel, ComplexImage& out, FlowDiagnostics& diag) {
    if (int(frame.size()) != width * height)
        throw std::invalid_argument("spatial_stage: frame size mismatch");
    if (kernel.width != kernel.height || kernel.width % 2 == 0)
        throw std::invalid_argument("spatial_stage: kernel must be odd and square");
    out.width = width;
    out.height = height;
    out.px.assign(std::size_t(width) * std::size_t(height), {0, 0});
    int K = kernel.width, c = K / 2;
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            std::complex<double> acc{0, 0};
            for (int qy = 0; qy < K; ++qy) {
                int sy = y + qy - c;
                if (sy < 0 || sy >= height) continue;
                for (int qx = 0; qx < K; ++qx) {
                    int sx = x + qx - c;
                    if (sx < 0 || sx >= width) continue;
                    acc += kernel.px[kernel.idx(qx, qy)] *
                           frame[std::size_t(sy) * std::size_t(width) + std::size_t(sx)];
                }
            }
            out.px[out.idx(x, y)] = acc;
            diag.synops += std::uint64_t(K) * std::uint64_t(K);
        }
    }
}

Vec2 preferred_velocity(double omega_x, double omega_t, double theta) {
    if (omega_x == 0) throw std::invalid_argument("preferred_velocity: omega_x must be nonzero");
    double speed = omega_t / omega_x;
    return {speed * std::cos(theta), speed * std::sin(theta)};
}

void opponent_energy_step(OpponentChannel& ch, const ComplexImage& a,
                          const FilterBankSpec& bank, FlowReadout readout,
                          Precision precision, const EngineFormats& formats,
                          std::int64_t t, EnergyPair& out, FlowDiagnostics& diag) {
    std::size_t npix = std::size_t(ch.width) * std::size_t(ch.height);
    if (a.px.size() != npix)
        throw std::invalid_argument("opponent_energy_step: activation map size mismatch");
    out.e_pos.resize(npix);
    out.e_neg.resize(npix);

    double cr = bank.rf_decay * std::cos(ch.omega_dt);
    double ci = bank.rf_decay * std::sin(ch.omega_dt);
    bool spikes = readout == FlowReadout::Spikes;

    if (precision == Precision::Float) {
        for (std::size_t i = 0; i < npix; ++i) {
            double ar = a.px[i].real(), ai = a.px[i].imag();
            // The neurons rotate clockwise (omega_dt < 0). Motion along +v
            // makes the activation phasor rotate counterclockwise, so the +
            // neuron integrates conj(a) (clockwise, resonant) and the -
            // neuron integrates a, the mirror direction.
            double pr = ch.z_pos[i].real(), pi = ch.z_pos[i].imag();
            double npr = cr * pr - ci * pi + ar;
            double npi = cr * pi + ci * pr - ai;
            double nr = ch.z_neg[i].real(), ni = ch.z_neg[i].imag();
            double nnr = cr * nr - ci * ni + ar;
            double nni = cr * ni + ci * nr + ai;
            if (spikes) {
                if (pi > 0 && npi <= 0 && npr > bank.rf_threshold) {
                    ch.r_pos[i] = npr;
                    ch.last_spike_pos[i] = t;
                    ++diag.spikes;
                }
                if (ni > 0 && nni <= 0 && nnr > bank.rf_threshold) {
                    ch.r_neg[i] = nnr;
                    ch.last_spike_neg[i] = t;
                    ++diag.spikes;
                }
                out.e_pos[i] = ch.r_pos[i] * ch.r_pos[i];
                out.e_neg[i] = ch.r_neg[i] * ch.r_neg[i];
            } else {
                out.e_pos[i] = npr * npr + npi * npi;
                out.e_neg[i] = nnr * nnr + nni * nni;
            }
            ch.z_pos[i] = {npr, npi};
            ch.z_neg[i] = {nnr, nni};
        }
    } else {
        RfParams p;
        p.decay = bank.rf_decay;
        p.omega_dt = ch.omega_dt;
        p.threshold = bank.rf_threshold;
        RfParamsFx px = compile_rf(p, formats);
        FixDiag fd;
        for (std::size_t i = 0; i < npix; ++i) {
            FixedComplex ax{fx_quantize(a.px[i].real(), formats.state, &fd),
                            fx_quantize(a.px[i].imag(), formats.state, &fd)};
            FixedComplex axc{ax.re, -ax.im};
            std::int64_t pi_prev = ch.zx_pos[i].z.im;
            std::int64_t ni_prev = ch.zx_neg[i].z.im;
            ch.zx_pos[i].z = fx_rotate_add(ch.zx_pos[i].z, formats.state, px.rotation,
                                           formats.coeff, axc, &fd);
            ch.zx_neg[i].z = fx_rotate_add(ch.zx_neg[i].z, formats.state, px.rotation,
                                           formats.coeff, ax, &fd);
            double zpr = fx_value(ch.zx_pos[i].z.re, formats.state);
            double zpi = fx_value(ch.zx_pos[i].z.im, formats.state);
            double znr = fx_value(ch.zx_neg[i].z.re, formats.state);
            double zni = fx_value(ch.zx_neg[i].z.im, formats.state);
            if (spikes) {
                if (pi_prev > 0 && ch.zx_pos[i].z.im <= 0 && zpr > bank.rf_threshold) {
                    ch.r_pos[i] = zpr;
                    ch.last_spike_pos[i] = t;
                    ++diag.spikes;
                }
                if (ni_prev > 0 && ch.zx_neg[i].z.im <= 0 && znr > bank.rf_threshold) {
                    ch.r_neg[i] = znr;
                    ch.last_spike_neg[i] = t;
                    ++diag.spikes;
                }
                out.e_pos[i] = ch.r_pos[i] * ch.r_pos[i];
                out.e_neg[i] = ch.r_neg[i] * ch.r_neg[i];
            } else {
                out.e_pos[i] = zpr * zpr + zpi * zpi;
                out.e_neg[i] = znr * znr + zni * zni;
            }
        }
        diag.saturations += fd.saturations;
    }
    diag.neuron_updates += 2 * npix;
}

FlowField estimate_flow(std::span<const ChannelEnergy> channels, int width, int height,
                        double energy_floor) {
    if (!(energy_floor > 0)) throw std::invalid_argument("estimate_flow: energy_floor must be positive");
    std::size_t npix = std::size_t(width) * std::size_t(height);
    for (const ChannelEnergy& ch : channels)
        if (!ch.e_pos || !ch.e_neg || ch.e_pos->size() != npix || ch.e_neg->size() != npix)
            throw std::invalid_argument("estimate_flow: channel map size mismatch");
    FlowField f;
    f.width = width;
    f.height = height;
    f.u.assign(npix, 0.0);
    f.v.assign(npix, 0.0);
    f.valid.assign(npix, 0);
    for (std::size_t i = 0; i < npix; ++i) {
        double nx = 0, ny = 0, den = 0;
        for (const ChannelEnergy& ch : channels) {
            double ep = (*ch.e_pos)[i], en = (*ch.e_neg)[i];
            nx += ch.vx * (ep - en);
            ny += ch.vy * (ep - en);
            den += ep + en;
        }
        if (den >= energy_floor) {
            f.u[i] = nx / den;
            f.v[i] = ny / den;
            f.valid[i] = 1;
        }
    }
    return f;
}

AeeResult aee_metrics(const FlowField& est, const FlowField& gt,
                      std::span<const std::uint8_t> mask, double dt_gt) {
    if (est.width != gt.width || est.height != gt.height)
        throw std::invalid_argument("aee_metrics: field shapes differ");
    std::size_t npix = std::size_t(est.width) * std::size_t(est.height);
    if (mask.size() != npix) throw std::invalid_argument("aee_metrics: mask size mismatch");
    if (!(dt_gt > 0)) throw std::invalid_argument("aee_metrics: dt_gt must be positive");

    AeeResult r;
    double err_sum = 0;
    std::size_t outliers = 0;
    double dir_sum = 0;
    std::size_t dir_n = 0;
    for (std::size_t i = 0; i < npix; ++i) {
        if (!mask[i] || !est.valid[i] || !gt.valid[i]) continue;
        double ex = (est.u[i] - gt.u[i]) * dt_gt;
        double ey = (est.v[i] - gt.v[i]) * dt_gt;
        double err = std::hypot(ex, ey);
        err_sum += err;
        if (err > 3.0) ++outliers;
        double ne = std::hypot(est.u[i], est.v[i]);
        double ng = std::hypot(gt.u[i], gt.v[i]);
        if (ne > 0 && ng > 0) {
            double cosang = (est.u[i] * gt.u[i] + est.v[i] * gt.v[i]) / (ne * ng);
            dir_sum += std::acos(std::clamp(cosang, -1.0, 1.0)) * 180.0 / kPi;
            ++dir_n;
        }
        ++r.n;
    }
    if (r.n == 0) throw std::invalid_argument("aee_metrics: empty evaluation mask");
    r.aee = err_sum / double(r.n);
    r.outlier_pct = 100.0 * double(outliers) / double(r.n);
    r.mean_direction_err_deg = dir_n ? dir_sum / double(dir_n) : 0.0;
    return r;
}

std::vector<std::uint8_t> interior_mask(int width, int height, int margin) {
    std::vector<std::uint8_t> m(std::size_t(width) * std::size_t(height), 0);
    for (int y = margin; y < height - margin; ++y)
        for (int x = margin; x < width - margin; ++x)
            m[std::size_t(y) * std::size_t(width) + std::size_t(x)] = 1;
    return m;
}

FlowRunResult run_flow(const EventFile& events, const FlowRunConfig& cfg) {
    cfg.bank.validate();
    cfg.formats.validate();
    validate_events(events);
    int W = events.width, H = events.height;
    if (W <= 0 || H <= 0) throw std::invalid_argument("run_flow: sensor dimensions missing");
    std::size_t npix = std::size_t(W) * std::size_t(H);
    int K = cfg.bank.kernel_size();

    std::size_t n_s = cfg.bank.spatial_freqs.size();
    std::size_t n_o = cfg.bank.orientations.size();
    std::size_t n_t = cfg.bank.temporal_freqs.size();
    std::size_t n_spatial = n_s * n_o;
    std::size_t n_channels = n_spatial * n_t;

    std::vector<ComplexImage> kernels(n_spatial);
    for (std::size_t s = 0; s < n_s; ++s)
        for (std::size_t o = 0; o < n_o; ++o)
            kernels[s * n_o + o] = gabor_kernel(cfg.bank.spatial_freqs[s],
                                                cfg.bank.orientations[o],
                                                cfg.bank.gabor_sigma, K);

    std::vector<OpponentChannel> channels(n_channels);
    for (std::size_t s = 0; s < n_s; ++s) {
        for (std::size_t o = 0; o < n_o; ++o) {
            for (std::size_t ti = 0; ti < n_t; ++ti) {
                OpponentChannel& ch = channels[(s * n_o + o) * n_t + ti];
                ch.omega_t = cfg.bank.temporal_freqs[ti];
                // Clockwise rotation puts the graded readout crossing on the
                // positive real axis (same convention as the audio bank).
                ch.omega_dt = -ch.omega_t * cfg.bank.dt;
                Vec2 v = preferred_velocity(cfg.bank.spatial_freqs[s], ch.omega_t,
                                            cfg.bank.orientations[o]);
                ch.vx = v.x;
                ch.vy = v.y;
                ch.width = W;
                ch.height = H;
                if (cfg.precision == Precision::Float) {
                    ch.z_pos.assign(npix, {0, 0});
                    ch.z_neg.assign(npix, {0, 0});
                } else {
                    ch.zx_pos.assign(npix, RfStateX{});
                    ch.zx_neg.assign(npix, RfStateX{});
                }
                ch.r_pos.assign(npix, 0.0);
                ch.r_neg.assign(npix, 0.0);
                ch.last_spike_pos.assign(npix, -1);
                ch.last_spike_neg.assign(npix, -1);
            }
        }
    }

    FlowRunResult res;
    res.event_mask.assign(npix, 0);
    std::int64_t bin_us = std::llround(cfg.bank.dt * 1e6);
    if (bin_us <= 0) throw std::invalid_argument("run_flow: dt too small for microsecond bins");
    std::int64_t n_bins = events.events.empty() ? 0 : events.events.back().t / bin_us + 1;
    res.n_bins = int(n_bins);
    int avg_bins = std::max(1, std::min<int>(cfg.average_last_bins, int(std::max<std::int64_t>(n_bins, 1))));
    std::int64_t first_avg_bin = n_bins - avg_bins;

    for (const DvsEvent& e : events.events)
        if (e.x < W && e.y < H) res.event_mask[std::size_t(e.y) * std::size_t(W) + std::size_t(e.x)] = 1;

    std::vector<ComplexImage> a_maps(n_spatial);
    for (auto& m : a_maps) {
        m.width = W;
        m.height = H;
        m.px.assign(npix, {0, 0});
    }
    std::vector<EnergyPair> energies(n_channels);
    std::vector<EnergyPair> e_accum(n_channels);
    for (auto& e : e_accum) {
        e.e_pos.assign(npix, 0.0);
        e.e_neg.assign(npix, 0.0);
    }
    std::vector<FlowDiagnostics> ch_diag(n_channels);
    std::vector<FlowDiagnostics> sp_diag(n_spatial);

    std::size_t ev_cursor = 0;
    const auto& ev = events.events;
    for (std::int64_t bin = 0; bin < n_bins; ++bin) {
        std::int64_t lo = bin * bin_us, hi = lo + bin_us;
        std::size_t begin = ev_cursor;
        while (ev_cursor < ev.size() && ev[ev_cursor].t < hi) ++ev_cursor;
        std::span<const DvsEvent> bin_events(ev.data() + begin, ev_cursor - begin);
        (void)lo;

        parallel_chunks(n_spatial, cfg.threads, [&](std::size_t b, std::size_t e) {
            for (std::size_t f = b; f < e; ++f)
                spatial_stage(bin_events, kernels[f], a_maps[f], sp_diag[f]);
        });

        bool accumulate = bin >= first_avg_bin;
        parallel_chunks(n_channels, cfg.threads, [&](std::size_t b, std::size_t e) {
            for (std::size_t c = b; c < e; ++c) {
                std::size_t f = c / n_t;
                opponent_energy_step(channels[c], a_maps[f], cfg.bank, cfg.readout,
                                     cfg.precision, cfg.formats, bin, energies[c], ch_diag[c]);
                if (accumulate) {
                    for (std::size_t i = 0; i < npix; ++i) {
                        e_accum[c].e_pos[i] += energies[c].e_pos[i];
                        e_accum[c].e_neg[i] += energies[c].e_neg[i];
                    }
                }
            }
        });
    }

    for (auto& d : sp_diag) {
        res.diag.synops += d.synops;
        res.diag.events_processed += d.events_processed;
        res.diag.events_dropped += d.events_dropped;
    }
    // Spatial results are shared across temporal channels: synops are charged
    // once per spatial filter, and each of the n_t channels reuses the map.
    res.diag.dense_synop_equiv =
        std::uint64_t(n_bins) * npix * std::uint64_t(K) * std::uint64_t(K) * n_spatial;
    for (auto& d : ch_diag) {
        res.diag.neuron_updates += d.neuron_updates;
        res.diag.spikes += d.spikes;
        res.diag.saturations += d.saturations;
    }

    std::vector<ChannelEnergy> pooled(n_channels);
    for (std::size_t c = 0; c < n_channels; ++c) {
        pooled[c].vx = channels[c].vx;
        pooled[c].vy = channels[c].vy;
        pooled[c].e_pos = &e_accum[c].e_pos;
        pooled[c].e_neg = &e_accum[c].e_neg;
    }
    // Accumulated sums share a bin count, so pooling ratios are unaffected.
    res.flow = estimate_flow(pooled, W, H, cfg.bank.energy_floor * avg_bins);

    if (cfg.readout == FlowReadout::Spikes) {
        res.staleness.resize(n_channels, -1);
        for (std::size_t c = 0; c < n_channels; ++c) {
            std::int64_t worst = -1;
            for (std::size_t i = 0; i < npix; ++i) {
                if (channels[c].last_spike_pos[i] >= 0)
                    worst = std::max(worst, (n_bins - 1) - channels[c].last_spike_pos[i]);
                if (channels[c].last_spike_neg[i] >= 0)
                    worst = std::max(worst, (n_bins - 1) - channels[c].last_spike_neg[i]);
            }
            res.staleness[c] = worst;
        }
    }
    return res;
}

}  // namespace resonet
