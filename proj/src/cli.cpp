#include "resonet/cli.hpp"

#include <cmath>
#include <complex>
#include <cstdio>
#include <filesystem>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "resonet/cochlea.hpp"
#include "resonet/neuron.hpp"
#include "resonet/optflow.hpp"
#include "resonet/signal_io.hpp"
#include "resonet/spectral.hpp"

namespace resonet {

namespace {

constexpr double kPi = 3.14159265358979323846;

std::filesystem::path prep_out_dir(const RunContext& ctx) {
    if (ctx.out_dir.empty()) throw std::invalid_argument("output directory must not be empty");
    std::filesystem::path p(ctx.out_dir);
    std::error_code ec;
    std::filesystem::create_directories(p, ec);
    if (ec) throw IoError("cannot create output directory " + ctx.out_dir + ": " + ec.message());
    return p;
}

Precision parse_precision(const std::string& s) {
    if (s == "float") return Precision::Float;
    if (s == "fixed") return Precision::Fixed;
    throw std::invalid_argument("precision must be 'float' or 'fixed' (got '" + s + "')");
}

// Records the global flags that influence results so resolved.cfg replays the
// run; threads and the output directory never affect results and stay out.
Precision record_run_keys(KeyValues& cfg, const RunContext& ctx) {
    cfg.set("run.precision", ctx.precision);
    cfg.set_int("run.seed", ctx.seed);
    Precision p = parse_precision(cfg.get_string("run.precision", "float"));
    cfg.get_int("run.seed", 1);
    return p;
}

using Metrics = std::vector<std::pair<std::string, std::string>>;

void write_metrics(const std::filesystem::path& dir, const Metrics& rows) {
    std::string text;
    for (const auto& [k, v] : rows) text += k + " = " + v + "\n";
    write_text_file((dir / "metrics.txt").string(), text);
}

void finish_run(const std::filesystem::path& dir, KeyValues& cfg) {
    cfg.fail_on_unconsumed();
    write_text_file((dir / "resolved.cfg").string(), cfg.serialize());
}

std::vector<double> parse_double_list(const std::string& text, const std::string& key) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t pos = 0;
            out.push_back(std::stod(item, &pos));
            while (pos < item.size() && (item[pos] == ' ' || item[pos] == '\t')) ++pos;
            if (pos != item.size()) throw std::invalid_argument("");
        } catch (const std::exception&) {
            throw std::invalid_argument(key + ": cannot parse '" + item + "' as a number");
        }
    }
    if (out.empty()) throw std::invalid_argument(key + ": empty list");
    return out;
}

AudioBuffer load_or_generate_audio(KeyValues& cfg, const std::string& prefix,
                                   double default_f0, double default_f1) {
    std::string input = cfg.get_string(prefix + ".input", "");
    if (!input.empty()) return read_wav(input);
    double sr = cfg.get_double(prefix + ".chirp.sample_rate", 16000);
    double f0 = cfg.get_double(prefix + ".chirp.f0", default_f0);
    double f1 = cfg.get_double(prefix + ".chirp.f1", default_f1);
    double dur = cfg.get_double(prefix + ".chirp.duration", 1.0);
    double amp = cfg.get_double(prefix + ".chirp.amplitude", 0.5);
    return gen_chirp(f0, f1, dur, sr, amp);
}

RfBankConfig load_bank(KeyValues& cfg, double sample_rate) {
    RfBankConfig bank;
    bank.n_neurons = int(cfg.get_int("bank.n_neurons", bank.n_neurons));
    bank.freq_lo = cfg.get_double("bank.freq_lo", bank.freq_lo);
    bank.freq_hi = cfg.get_double("bank.freq_hi", bank.freq_hi);
    std::string spacing = cfg.get_string("bank.spacing", "log");
    if (spacing == "log")
        bank.spacing = RfBankConfig::Spacing::Log;
    else if (spacing == "linear")
        bank.spacing = RfBankConfig::Spacing::Linear;
    else
        throw std::invalid_argument("bank.spacing must be 'log' or 'linear'");
    bank.decay = cfg.get_double("bank.decay", bank.decay);
    bank.threshold = cfg.get_double("bank.threshold", bank.threshold);
    bank.sample_rate = sample_rate;
    bank.validate();
    return bank;
}

void write_spikes_csv(const std::filesystem::path& path, std::span<const SpikeEvent> events) {
    std::string text = "t,neuron,payload\n";
    for (const SpikeEvent& e : events) {
        text += std::to_string(e.t);
        text += ',';
        text += std::to_string(e.neuron);
        text += ',';
        text += format_double(e.payload);
        text += '\n';
    }
    write_text_file(path.string(), text);
}

}  // namespace

int cmd_neuron_demo(KeyValues& cfg, const RunContext& ctx) {
    std::filesystem::path dir = prep_out_dir(ctx);
    Precision prec = record_run_keys(cfg, ctx);
    EngineFormats formats;

    int steps = int(cfg.get_int("demo.steps", 64));
    double amp = cfg.get_double("demo.amplitude", 0.25);
    if (steps <= 0) throw std::invalid_argument("demo.steps must be positive");

    LifParams lif;
    lif.decay_u = cfg.get_double("lif.decay_u", 0.6);
    lif.decay_v = cfg.get_double("lif.decay_v", 0.5);
    lif.threshold = cfg.get_double("lif.threshold", 1.0);
    lif.validate();

    RfParams rf;
    rf.decay = cfg.get_double("rf.decay", 0.95);
    // Negative phase step so the cosine drive below makes the neuron fire.
    rf.omega_dt = cfg.get_double("rf.omega_dt", -0.3);
    rf.threshold = cfg.get_double("rf.threshold", 0.1);
    rf.validate();

    HopfParams hopf;
    hopf.omega0 = cfg.get_double("hopf.omega0", 2 * kPi * 4);
    hopf.lambda = cfg.get_double("hopf.lambda", 0.04);
    hopf.dt = cfg.get_double("hopf.dt", 0.01);
    hopf.validate();

    FixDiag fd;
    std::string lif_csv = "t,u,v,spike\n";
    std::string rf_csv = "t,re,im,payload\n";
    std::string hopf_csv = "t,re,im,abs\n";
    std::int64_t lif_spikes = 0, rf_events = 0;
    double hopf_abs = 0;

    if (prec == Precision::Float) {
        LifStateF ls;
        RfStateF rs;
        std::complex<double> hz{0.05, 0};
        for (int t = 0; t < steps; ++t) {
            bool sp = lif_step(ls, amp, lif);
            lif_spikes += sp;
            lif_csv += std::to_string(t) + "," + format_double(ls.u) + "," +
                       format_double(ls.v) + "," + (sp ? "1" : "0") + "\n";
            auto fired = rf_step(rs, {amp * std::cos(rf.omega_dt * t), 0}, rf);
            rf_events += fired.has_value();
            rf_csv += std::to_string(t) + "," + format_double(rs.z.real()) + "," +
                      format_double(rs.z.imag()) + "," +
                      (fired ? format_double(*fired) : "0") + "\n";
            hz = hopf_step(hz, {0, 0}, hopf);
            hopf_abs = std::abs(hz);
            hopf_csv += std::to_string(t) + "," + format_double(hz.real()) + "," +
                        format_double(hz.imag()) + "," + format_double(hopf_abs) + "\n";
        }
    } else {
        LifParamsFx lifx = compile_lif(lif, formats);
        RfParamsFx rfx = compile_rf(rf, formats);
        LifStateX ls;
        RfStateX rs;
        FixedComplex hz{fx_quantize(0.05, formats.state), 0};
        std::int64_t amp_raw = fx_quantize(amp, formats.state, &fd);
        for (int t = 0; t < steps; ++t) {
            bool sp = lif_step(ls, amp_raw, lifx, formats, fd);
            lif_spikes += sp;
            lif_csv += std::to_string(t) + "," + format_double(fx_value(ls.u, formats.state)) +
                       "," + format_double(fx_value(ls.v, formats.state)) + "," +
                       (sp ? "1" : "0") + "\n";
            FixedComplex a{fx_quantize(amp * std::cos(rf.omega_dt * t), formats.state, &fd), 0};
            auto fired = rf_step(rs, a, rfx, formats, fd);
            rf_events += fired.has_value();
            rf_csv += std::to_string(t) + "," +
                      format_double(fx_value(rs.z.re, formats.state)) + "," +
                      format_double(fx_value(rs.z.im, formats.state)) + "," +
                      (fired ? format_double(fx_value(*fired, formats.state)) : "0") + "\n";
            hz = hopf_step(hz, FixedComplex{0, 0}, hopf, formats, fd);
            hopf_abs = std::hypot(fx_value(hz.re, formats.state), fx_value(hz.im, formats.state));
            hopf_csv += std::to_string(t) + "," + format_double(fx_value(hz.re, formats.state)) +
                        "," + format_double(fx_value(hz.im, formats.state)) + "," +
                        format_double(hopf_abs) + "\n";
        }
    }

    write_text_file((dir / "lif.csv").string(), lif_csv);
    write_text_file((dir / "rf.csv").string(), rf_csv);
    write_text_file((dir / "hopf.csv").string(), hopf_csv);
    write_metrics(dir, {{"lif_spikes", std::to_string(lif_spikes)},
                        {"rf_events", std::to_string(rf_events)},
                        {"hopf_final_abs", format_double(hopf_abs)},
                        {"saturations", std::to_string(fd.saturations)}});
    finish_run(dir, cfg);
    return ExitOk;
}

int cmd_stft(const std::string& action, KeyValues& cfg, const RunContext& ctx) {
    if (action != "encode" && action != "reconstruct" && action != "report")
        throw std::invalid_argument("stft action must be encode, reconstruct, or report");
    std::filesystem::path dir = prep_out_dir(ctx);
    Precision prec = record_run_keys(cfg, ctx);

    AudioBuffer audio = load_or_generate_audio(cfg, "stft", 200, 2000);
    RfBankConfig bank = load_bank(cfg, audio.sample_rate);

    EncodeOptions opt;
    opt.precision = prec;
    opt.threads = ctx.threads;
    opt.keep_state = false;
    double kernel_floor = cfg.get_double("stft.kernel_floor", 1e-4);

    EncodeResult enc = encode_stft(audio.samples, bank, opt);
    write_spikes_csv(dir / "spikes.csv", enc.spec.events);

    Metrics m;
    m.emplace_back("n_samples", std::to_string(audio.samples.size()));
    m.emplace_back("n_neurons", std::to_string(bank.n_neurons));
    m.emplace_back("n_spikes", std::to_string(enc.spec.events.size()));
    m.emplace_back("spikes_per_sample",
                   format_double(audio.samples.empty()
                                     ? 0.0
                                     : double(enc.spec.events.size()) / double(audio.samples.size())));
    m.emplace_back("saturations", std::to_string(enc.diag.saturations));

    if (action == "reconstruct") {
        std::vector<double> recon =
            reconstruct_fit(enc.spec, bank, audio.samples, kernel_floor, ctx.threads);
        double corr = pearson(audio.samples, recon);
        AudioBuffer out;
        out.sample_rate = audio.sample_rate;
        out.samples = std::move(recon);
        for (double& s : out.samples) s = std::clamp(s, -1.0, 1.0);
        write_wav((dir / "recon.wav").string(), out);
        m.emplace_back("correlation", format_double(corr));
    } else if (action == "report") {
        std::string topk_text = cfg.get_string("stft.topk", "");
        std::vector<std::int64_t> topk;
        if (!topk_text.empty())
            for (double v : parse_double_list(topk_text, "stft.topk"))
                topk.push_back(std::llround(v));
        CompressionReport rep =
            compression_report(enc.spec, audio.samples, bank, topk, ctx.threads);
        m.emplace_back("correlation", format_double(rep.correlation));
        m.emplace_back("n_dense", std::to_string(rep.n_dense));
        m.emplace_back("bandwidth_ratio", format_double(rep.bandwidth_ratio));
        for (const auto& tk : rep.dense_baseline)
            m.emplace_back("topk_" + std::to_string(tk.k) + "_correlation",
                           format_double(tk.correlation));
    }

    write_metrics(dir, m);
    finish_run(dir, cfg);
    return ExitOk;
}

int cmd_flow(KeyValues& cfg, const RunContext& ctx) {
    std::filesystem::path dir = prep_out_dir(ctx);
    Precision prec = record_run_keys(cfg, ctx);

    FlowRunConfig rc;
    rc.precision = prec;
    rc.threads = ctx.threads;
    rc.bank.rf_h = rc.bank.rf_w = int(cfg.get_int("flow.rf_size", 64));
    rc.bank.dt = cfg.get_double("flow.dt", rc.bank.dt);
    rc.bank.gabor_sigma = cfg.get_double("flow.gabor_sigma", rc.bank.gabor_sigma);
    rc.bank.rf_decay = cfg.get_double("flow.rf_decay", rc.bank.rf_decay);
    rc.bank.rf_threshold = cfg.get_double("flow.rf_threshold", rc.bank.rf_threshold);
    rc.bank.energy_floor = cfg.get_double("flow.energy_floor", rc.bank.energy_floor);
    rc.average_last_bins = int(cfg.get_int("flow.average_last_bins", 1));
    std::string readout = cfg.get_string("flow.readout", "dense");
    if (readout == "dense")
        rc.readout = FlowReadout::Dense;
    else if (readout == "spikes")
        rc.readout = FlowReadout::Spikes;
    else
        throw std::invalid_argument("flow.readout must be 'dense' or 'spikes'");
    rc.bank.validate();

    EventFile events;
    bool have_gt = false;
    FlowField gt;
    std::string input = cfg.get_string("flow.input", "");
    if (!input.empty()) {
        std::string fmt = cfg.get_string("flow.format", "auto");
        bool bin = fmt == "bin" || (fmt == "auto" && input.size() > 4 &&
                                    input.compare(input.size() - 4, 4, ".bin") == 0);
        events = bin ? read_events_bin(input) : read_events_csv(input);
    } else {
        GratingSpec g;
        g.width = int(cfg.get_int("flow.grating.width", 112));
        g.height = int(cfg.get_int("flow.grating.height", 112));
        g.omega_x = cfg.get_double("flow.grating.omega_x", rc.bank.spatial_freqs[0]);
        g.theta = cfg.get_double("flow.grating.theta", 0.0);
        g.velocity = cfg.get_double("flow.grating.velocity", 512.0 / 3.0);
        g.duration = cfg.get_double("flow.grating.duration", 1.0);
        g.event_rate = cfg.get_double("flow.grating.event_rate", 1.0);
        g.amplitude = cfg.get_double("flow.grating.amplitude", 1.0);
        g.gen_dt = cfg.get_double("flow.grating.gen_dt", 1e-3);
        GratingResult gr = gen_drifting_grating(g);
        events = std::move(gr.events);
        gt.width = g.width;
        gt.height = g.height;
        std::size_t npix = std::size_t(g.width) * std::size_t(g.height);
        gt.u.assign(npix, gr.vx);
        gt.v.assign(npix, gr.vy);
        gt.valid.assign(npix, 1);
        have_gt = true;
        write_events_csv((dir / "events.csv").string(), events);
    }

    FlowRunResult run = run_flow(events, rc);
    write_flow_csv((dir / "flow.csv").string(), run.flow);
    write_flow_ppm((dir / "flow.ppm").string(), run.flow);

    Metrics m;
    m.emplace_back("n_events", std::to_string(events.events.size()));
    m.emplace_back("n_bins", std::to_string(run.n_bins));
    std::size_t valid_px = 0;
    for (std::uint8_t v : run.flow.valid) valid_px += v;
    m.emplace_back("valid_pixels", std::to_string(valid_px));
    m.emplace_back("synops", std::to_string(run.diag.synops));
    m.emplace_back("dense_synop_equiv", std::to_string(run.diag.dense_synop_equiv));
    m.emplace_back("synop_ratio",
                   format_double(run.diag.synops
                                     ? double(run.diag.dense_synop_equiv) / double(run.diag.synops)
                                     : 0.0));
    m.emplace_back("neuron_updates", std::to_string(run.diag.neuron_updates));
    m.emplace_back("saturations", std::to_string(run.diag.saturations));
    if (rc.readout == FlowReadout::Spikes) {
        m.emplace_back("spikes", std::to_string(run.diag.spikes));
        std::int64_t worst = -1;
        for (std::int64_t s : run.staleness) worst = std::max(worst, s);
        m.emplace_back("max_staleness_bins", std::to_string(worst));
    }
    if (have_gt) {
        int margin = rc.bank.kernel_size() / 2;
        std::vector<std::uint8_t> mask = interior_mask(gt.width, gt.height, margin);
        for (std::size_t i = 0; i < mask.size(); ++i) mask[i] &= run.event_mask[i];
        AeeResult aee = aee_metrics(run.flow, gt, mask, rc.bank.dt);
        m.emplace_back("aee_px", format_double(aee.aee));
        m.emplace_back("outlier_pct", format_double(aee.outlier_pct));
        m.emplace_back("direction_err_deg", format_double(aee.mean_direction_err_deg));
        m.emplace_back("aee_n", std::to_string(aee.n));
    }

    write_metrics(dir, m);
    finish_run(dir, cfg);
    return ExitOk;
}

int cmd_cochlea(const std::string& action, KeyValues& cfg, const RunContext& ctx) {
    if (action != "run" && action != "sweep")
        throw std::invalid_argument("cochlea action must be run or sweep");
    std::filesystem::path dir = prep_out_dir(ctx);
    Precision prec = record_run_keys(cfg, ctx);

    CascadeConfig cc;
    cc.f_hi = cfg.get_double("cochlea.f_hi", cc.f_hi);
    cc.f_lo = cfg.get_double("cochlea.f_lo", cc.f_lo);
    cc.sections_per_octave = int(cfg.get_int("cochlea.sections_per_octave", cc.sections_per_octave));
    cc.lambda = cfg.get_double("cochlea.lambda", cc.lambda);
    cc.sample_rate = cfg.get_double("cochlea.sample_rate", cc.sample_rate);
    cc.output_ceiling = cfg.get_double("cochlea.output_ceiling", cc.output_ceiling);
    cc.validate();

    Metrics m;
    if (action == "run") {
        AudioBuffer audio;
        std::string input = cfg.get_string("cochlea.input", "");
        if (!input.empty()) {
            audio = read_wav(input);
            if (audio.sample_rate != cc.sample_rate)
                throw std::invalid_argument("cochlea.sample_rate does not match the input wav");
        } else {
            double f = cfg.get_double("cochlea.tone.freq", 1500);
            double amp = cfg.get_double("cochlea.tone.amplitude", 0.05);
            double durs = cfg.get_double("cochlea.tone.duration", 0.5);
            audio.sample_rate = cc.sample_rate;
            std::size_t n = std::size_t(std::llround(durs * cc.sample_rate));
            audio.samples.resize(n);
            for (std::size_t t = 0; t < n; ++t)
                audio.samples[t] = amp * std::sin(2 * kPi * f * double(t) / cc.sample_rate);
        }

        CascadeOutput out = cascade_run(cc, audio.samples);
        std::size_t tail = audio.samples.size() / 2;
        std::string csv = "section,freq_hz,peak\n";
        int best = 0;
        double best_peak = -1;
        for (std::size_t s = 0; s < out.outputs.size(); ++s) {
            double pk = 0;
            for (std::size_t t = tail; t < out.outputs[s].size(); ++t)
                pk = std::max(pk, std::abs(out.outputs[s][t]));
            csv += std::to_string(s) + "," + format_double(out.freqs[s]) + "," +
                   format_double(pk) + "\n";
            if (pk > best_peak) {
                best_peak = pk;
                best = int(s);
            }
        }
        write_text_file((dir / "response.csv").string(), csv);
        m.emplace_back("n_sections", std::to_string(out.outputs.size()));
        m.emplace_back("best_section", std::to_string(best));
        m.emplace_back("best_freq_hz", format_double(out.freqs[std::size_t(best)]));
        m.emplace_back("best_peak", format_double(best_peak));

        if (cfg.get_bool("cochlea.spikes", false)) {
            LifParams lif;
            lif.decay_u = cfg.get_double("cochlea.lif.decay_u", 0.6);
            lif.decay_v = cfg.get_double("cochlea.lif.decay_v", 0.5);
            lif.threshold = cfg.get_double("cochlea.lif.threshold", 1.0);
            LifEncoderResult enc = lif_spike_encoder(out, lif, EngineFormats{});
            write_spikes_csv(dir / "spikes.csv", enc.spikes);
            m.emplace_back("n_spikes", std::to_string(enc.spikes.size()));
            m.emplace_back("saturations", std::to_string(enc.diag.saturations));
        }
        (void)prec;  // cascade integration is float; prec recorded for replay
    } else {
        double f_lo = cfg.get_double("cochlea.sweep.f_lo", 1000);
        double f_hi = cfg.get_double("cochlea.sweep.f_hi", 2000);
        int n_freqs = int(cfg.get_int("cochlea.sweep.n_freqs", 6));
        if (n_freqs < 1) throw std::invalid_argument("cochlea.sweep.n_freqs must be >= 1");
        std::vector<double> freqs(static_cast<std::size_t>(n_freqs));
        for (int k = 0; k < n_freqs; ++k)
            freqs[std::size_t(k)] =
                n_freqs == 1 ? f_lo : f_lo * std::pow(f_hi / f_lo, double(k) / (n_freqs - 1));
        std::vector<double> amps =
            parse_double_list(cfg.get_string("cochlea.sweep.amps", "0.001,0.01,0.1"),
                              "cochlea.sweep.amps");
        double duration = cfg.get_double("cochlea.sweep.duration", 0.5);

        SweepResult sw = gain_sweep(cc, freqs, amps, duration, ctx.threads);
        std::string csv = "freq_hz,amplitude,peak\n";
        for (std::size_t fi = 0; fi < sw.freqs.size(); ++fi)
            for (std::size_t a = 0; a < sw.amplitudes.size(); ++a)
                csv += format_double(sw.freqs[fi]) + "," + format_double(sw.amplitudes[a]) +
                       "," + format_double(sw.peak[fi][a]) + "\n";
        write_text_file((dir / "sweep.csv").string(), csv);
        std::string summary = "freq_hz,best_section,spread_db\n";
        double max_spread = 0;
        for (std::size_t fi = 0; fi < sw.freqs.size(); ++fi) {
            summary += format_double(sw.freqs[fi]) + "," +
                       std::to_string(sw.best_section[fi]) + "," +
                       format_double(sw.spread_db[fi]) + "\n";
            max_spread = std::max(max_spread, sw.spread_db[fi]);
        }
        write_text_file((dir / "summary.csv").string(), summary);
        m.emplace_back("n_freqs", std::to_string(sw.freqs.size()));
        m.emplace_back("n_amplitudes", std::to_string(sw.amplitudes.size()));
        m.emplace_back("max_spread_db", format_double(max_spread));
    }

    write_metrics(dir, m);
    finish_run(dir, cfg);
    return ExitOk;
}

int run_cli(int argc, char** argv) {
    CLI::App app{"resonet: spiking resonator pipelines (STFT, optical flow, cochlea)"};
    app.require_subcommand(1);

    std::string config_path;
    RunContext ctx;
    ctx.out_dir = "resonet_out";
    std::vector<std::string> overrides;
    app.add_option("--config", config_path, "key = value config file");
    app.add_option("--out", ctx.out_dir, "output directory (created if missing)");
    app.add_option("--seed", ctx.seed, "run seed, recorded in resolved.cfg");
    app.add_option("--precision", ctx.precision, "float | fixed")
        ->check(CLI::IsMember({"float", "fixed"}));
    app.add_option("--threads", ctx.threads, "worker threads")->check(CLI::PositiveNumber);
    app.add_option("--set", overrides, "config override key=value (repeatable)");

    // fallthrough lets the global flags (--set, --out, ...) appear after the
    // subcommand, which is how the command line reads naturally
    CLI::App* demo = app.add_subcommand("neuron-demo", "single-neuron trace demo");
    demo->fallthrough();
    std::string stft_action = "encode";
    CLI::App* stft = app.add_subcommand("stft", "spiking STFT encode/reconstruct/report");
    stft->fallthrough();
    stft->add_option("action", stft_action, "encode | reconstruct | report")
        ->check(CLI::IsMember({"encode", "reconstruct", "report"}));
    CLI::App* flow = app.add_subcommand("flow", "event-based optical flow");
    flow->fallthrough();
    std::string cochlea_action = "run";
    CLI::App* cochlea = app.add_subcommand("cochlea", "resonator cascade run/sweep");
    cochlea->fallthrough();
    cochlea->add_option("action", cochlea_action, "run | sweep")
        ->check(CLI::IsMember({"run", "sweep"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? ExitOk : ExitUsage;
    }

    try {
        KeyValues cfg;
        if (!config_path.empty()) cfg = KeyValues::parse_file(config_path);
        for (const std::string& ov : overrides) {
            std::size_t eq = ov.find('=');
            if (eq == std::string::npos || eq == 0)
                throw std::invalid_argument("--set expects key=value (got '" + ov + "')");
            std::string key = ov.substr(0, eq);
            std::string val = ov.substr(eq + 1);
            while (!key.empty() && key.back() == ' ') key.pop_back();
            while (!val.empty() && val.front() == ' ') val.erase(val.begin());
            cfg.set(key, val);
        }

        if (demo->parsed()) return cmd_neuron_demo(cfg, ctx);
        if (stft->parsed()) return cmd_stft(stft_action, cfg, ctx);
        if (flow->parsed()) return cmd_flow(cfg, ctx);
        if (cochlea->parsed()) return cmd_cochlea(cochlea_action, cfg, ctx);
        return ExitUsage;
    } catch (const IoError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return ExitIo;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return ExitUsage;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return ExitNumeric;
    }
}

}  // namespace resonet
