#include "resonet/signal_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>

namespace resonet {

namespace {

constexpr double kPi = 3.14159265358979323846;

void put_u16(std::string& out, std::uint16_t v) {
    out.push_back(char(v & 0xff));
    out.push_back(char((v >> 8) & 0xff));
}

void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(char((v >> (8 * i)) & 0xff));
}

void put_u64(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(char((v >> (8 * i)) & 0xff));
}

void put_i64(std::string& out, std::int64_t v) { put_u64(out, std::uint64_t(v)); }

struct ByteReader {
    const std::string& buf;
    std::size_t pos = 0;
    const std::string& path;

    void need(std::size_t n, const char* what) {
        if (pos + n > buf.size())
            throw IoError(path + ": truncated file while reading " + what);
    }
    std::uint16_t u16(const char* what) {
        need(2, what);
        std::uint16_t v = std::uint16_t(std::uint8_t(buf[pos])) |
                          std::uint16_t(std::uint8_t(buf[pos + 1])) << 8;
        pos += 2;
        return v;
    }
    std::uint32_t u32(const char* what) {
        need(4, what);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= std::uint32_t(std::uint8_t(buf[pos + std::size_t(i)])) << (8 * i);
        pos += 4;
        return v;
    }
    std::uint64_t u64(const char* what) {
        need(8, what);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= std::uint64_t(std::uint8_t(buf[pos + std::size_t(i)])) << (8 * i);
        pos += 8;
        return v;
    }
};

long long parse_ll(std::string_view field, const std::string& path, int lineno) {
    long long out = 0;
    auto [p, ec] = std::from_chars(field.data(), field.data() + field.size(), out);
    if (ec != std::errc() || p != field.data() + field.size())
        throw IoError(path + ":" + std::to_string(lineno) + ": bad integer field '" +
                      std::string(field) + "'");
    return out;
}

double parse_dbl(std::string_view field, const std::string& path, int lineno) {
    double out = 0;
    auto [p, ec] = std::from_chars(field.data(), field.data() + field.size(), out);
    if (ec != std::errc() || p != field.data() + field.size())
        throw IoError(path + ":" + std::to_string(lineno) + ": bad numeric field '" +
                      std::string(field) + "'");
    return out;
}

std::vector<std::string_view> split_csv(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        std::size_t comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            out.push_back(line.substr(start));
            break;
        }
        out.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
    return out;
}

}  // namespace

std::string format_double(double x) {
    char buf[64];
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, x);
    (void)ec;
    return std::string(buf, p);
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path);
    out.write(content.data(), std::streamsize(content.size()));
    if (!out) throw IoError("write failed: " + path);
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

AudioBuffer read_wav(const std::string& path) {
    std::string raw = read_text_file(path);
    ByteReader r{raw, 0, path};
    if (r.u32("RIFF id") != 0x46464952u)  // "RIFF"
        throw IoError(path + ": not a RIFF file");
    r.u32("RIFF size");
    if (r.u32("WAVE id") != 0x45564157u)  // "WAVE"
        throw IoError(path + ": not a WAVE file");

    AudioBuffer audio;
    audio.source = path;
    bool got_fmt = false, got_data = false;
    while (r.pos + 8 <= raw.size()) {
        std::uint32_t id = r.u32("chunk id");
        std::uint32_t size = r.u32("chunk size");
        if (id == 0x20746d66u) {  // "fmt "
            r.need(size, "fmt chunk");
            std::size_t base = r.pos;
            std::uint16_t format = std::uint16_t(std::uint8_t(raw[base])) |
                                   std::uint16_t(std::uint8_t(raw[base + 1])) << 8;
            std::uint16_t channels = std::uint16_t(std::uint8_t(raw[base + 2])) |
                                     std::uint16_t(std::uint8_t(raw[base + 3])) << 8;
            std::uint32_t rate = 0;
            for (int i = 0; i < 4; ++i) rate |= std::uint32_t(std::uint8_t(raw[base + 4 + std::size_t(i)])) << (8 * i);
            std::uint16_t bits = std::uint16_t(std::uint8_t(raw[base + 14])) |
                                 std::uint16_t(std::uint8_t(raw[base + 15])) << 8;
            if (format != 1) throw IoError(path + ": only PCM wav supported");
            if (channels != 1) throw IoError(path + ": only mono wav supported");
            if (bits != 16) throw IoError(path + ": only 16-bit wav supported");
            audio.sample_rate = rate;
            got_fmt = true;
            r.pos = base + size + (size & 1);
        } else if (id == 0x61746164u) {  // "data"
            if (!got_fmt) throw IoError(path + ": data chunk before fmt chunk");
            r.need(size, "data chunk");
            std::size_t n = size / 2;
            audio.samples.resize(n);
            for (std::size_t i = 0; i < n; ++i) {
                std::uint16_t lo = std::uint8_t(raw[r.pos + 2 * i]);
                std::uint16_t hi = std::uint8_t(raw[r.pos + 2 * i + 1]);
                std::int16_t s = std::int16_t(std::uint16_t(lo | (hi << 8)));
                audio.samples[i] = double(s) / 32768.0;
            }
            r.pos += size + (size & 1);
            got_data = true;
        } else {
            r.need(size, "chunk body");
            r.pos += size + (size & 1);
        }
    }
    if (!got_data) throw IoError(path + ": no data chunk");
    return audio;
}

void write_wav(const std::string& path, const AudioBuffer& audio) {
    if (!(audio.sample_rate > 0)) throw IoError("write_wav: sample_rate must be positive");
    std::string pcm;
    pcm.reserve(audio.samples.size() * 2);
    for (double x : audio.samples) {
        if (!std::isfinite(x)) throw IoError("write_wav: non-finite sample");
        double scaled = std::round(x * 32768.0);
        scaled = std::clamp(scaled, -32768.0, 32767.0);
        put_u16(pcm, std::uint16_t(std::int16_t(scaled)));
    }
    std::uint32_t rate = std::uint32_t(std::llround(audio.sample_rate));
    std::string out;
    out.reserve(44 + pcm.size());
    out += "RIFF";
    put_u32(out, std::uint32_t(36 + pcm.size()));
    out += "WAVEfmt ";
    put_u32(out, 16);
    put_u16(out, 1);   // PCM
    put_u16(out, 1);   // mono
    put_u32(out, rate);
    put_u32(out, rate * 2);  // byte rate
    put_u16(out, 2);   // block align
    put_u16(out, 16);  // bits per sample
    out += "data";
    put_u32(out, std::uint32_t(pcm.size()));
    out += pcm;
    write_text_file(path, out);
}

AudioBuffer gen_chirp(double f0, double f1, double duration, double sample_rate,
                      double amplitude) {
    if (!(sample_rate > 0)) throw std::invalid_argument("gen_chirp: sample_rate must be positive");
    double nyquist = sample_rate / 2;
    if (!(f0 > 0 && f0 < nyquist) || !(f1 > 0 && f1 < nyquist))
        throw std::invalid_argument("gen_chirp: frequencies must lie in (0, nyquist)");
    if (!(duration > 0)) throw std::invalid_argument("gen_chirp: duration must be positive");
    AudioBuffer audio;
    audio.sample_rate = sample_rate;
    audio.source = "chirp";
    std::size_t n = std::size_t(std::llround(duration * sample_rate));
    audio.samples.resize(n);
    double rate = (f1 - f0) / duration;  // Hz per second
    for (std::size_t i = 0; i < n; ++i) {
        double t = double(i) / sample_rate;
        double phase = 2 * kPi * (f0 * t + 0.5 * rate * t * t);
        audio.samples[i] = amplitude * std::cos(phase);
    }
    return audio;
}

void validate_events(const EventFile& ef) {
    std::int64_t prev = std::numeric_limits<std::int64_t>::min();
    for (std::size_t i = 0; i < ef.events.size(); ++i) {
        const DvsEvent& e = ef.events[i];
        if (e.t < prev)
            throw IoError("event record " + std::to_string(i + 1) + ": timestamps not nondecreasing");
        if (e.x >= ef.width || e.y >= ef.height)
            throw IoError("event record " + std::to_string(i + 1) + ": coordinates out of bounds");
        if (e.polarity != 1 && e.polarity != -1)
            throw IoError("event record " + std::to_string(i + 1) + ": polarity must be +1 or -1");
        prev = e.t;
    }
}

EventFile read_events_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open: " + path);
    std::string line;
    int lineno = 0;

    if (!std::getline(in, line)) throw IoError(path + ": empty file");
    ++lineno;
    // Dimension comment then the column header.
    if (line.rfind("# sensor ", 0) != 0)
        throw IoError(path + ":1: expected '# sensor <width> <height>'");
    std::istringstream dims(line.substr(9));
    long long w = 0, h = 0;
    if (!(dims >> w >> h) || w <= 0 || h <= 0 || w > 65535 || h > 65535)
        throw IoError(path + ":1: bad sensor dimensions");

    if (!std::getline(in, line)) throw IoError(path + ": missing column header");
    ++lineno;
    if (line != "t_us,x,y,polarity")
        throw IoError(path + ":2: expected header 't_us,x,y,polarity'");

    EventFile ef;
    ef.width = std::uint16_t(w);
    ef.height = std::uint16_t(h);
    std::int64_t prev = std::numeric_limits<std::int64_t>::min();
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        auto fields = split_csv(line);
        if (fields.size() != 4)
            throw IoError(path + ":" + std::to_string(lineno) + ": expected 4 fields");
        DvsEvent e;
        e.t = parse_ll(fields[0], path, lineno);
        long long x = parse_ll(fields[1], path, lineno);
        long long y = parse_ll(fields[2], path, lineno);
        long long p = parse_ll(fields[3], path, lineno);
        if (x < 0 || x >= w || y < 0 || y >= h)
            throw IoError(path + ":" + std::to_string(lineno) + ": coordinates out of bounds");
        if (p != 1 && p != -1)
            throw IoError(path + ":" + std::to_string(lineno) + ": polarity must be +1 or -1");
        if (e.t < prev)
            throw IoError(path + ":" + std::to_string(lineno) + ": timestamps out of order");
        prev = e.t;
        e.x = std::uint16_t(x);
        e.y = std::uint16_t(y);
        e.polarity = std::int8_t(p);
        ef.events.push_back(e);
    }
    return ef;
}

void write_events_csv(const std::string& path, const EventFile& ef) {
    validate_events(ef);
    std::string out = "# sensor " + std::to_string(ef.width) + " " + std::to_string(ef.height) +
                      "\nt_us,x,y,polarity\n";
    for (const DvsEvent& e : ef.events) {
        out += std::to_string(e.t);
        out += ',';
        out += std::to_string(e.x);
        out += ',';
        out += std::to_string(e.y);
        out += ',';
        out += std::to_string(int(e.polarity));
        out += '\n';
    }
    write_text_file(path, out);
}

EventFile read_events_bin(const std::string& path) {
    std::string raw = read_text_file(path);
    ByteReader r{raw, 0, path};
    if (r.u32("magic") != 0x56454e52u)  // "RNEV"
        throw IoError(path + ": bad magic, not an event file");
    std::uint32_t version = r.u32("version");
    if (version != 1) throw IoError(path + ": unsupported version " + std::to_string(version));
    EventFile ef;
    ef.width = r.u16("width");
    ef.height = r.u16("height");
    std::uint64_t count = r.u64("count");
    ef.events.resize(count);
    for (std::uint64_t i = 0; i < count; ++i) {
        DvsEvent& e = ef.events[i];
        e.t = std::int64_t(r.u64("event time"));
        e.x = r.u16("event x");
        e.y = r.u16("event y");
        r.need(1, "event polarity");
        e.polarity = std::int8_t(raw[r.pos++]);
    }
    if (r.pos != raw.size()) throw IoError(path + ": trailing bytes after event records");
    validate_events(ef);
    return ef;
}

void write_events_bin(const std::string& path, const EventFile& ef) {
    validate_events(ef);
    std::string out;
    out.reserve(20 + ef.events.size() * 13);
    put_u32(out, 0x56454e52u);
    put_u32(out, 1);
    put_u16(out, ef.width);
    put_u16(out, ef.height);
    put_u64(out, ef.events.size());
    for (const DvsEvent& e : ef.events) {
        put_i64(out, e.t);
        put_u16(out, e.x);
        put_u16(out, e.y);
        out.push_back(char(e.polarity));
    }
    write_text_file(path, out);
}

GratingResult gen_drifting_grating(const GratingSpec& spec) {
    if (spec.width <= 0 || spec.height <= 0 || spec.width > 65535 || spec.height > 65535)
        throw std::invalid_argument("gen_drifting_grating: degenerate size");
    if (!(spec.duration > 0) || !(spec.gen_dt > 0))
        throw std::invalid_argument("gen_drifting_grating: duration and gen_dt must be positive");
    if (!(spec.event_rate > 0))
        throw std::invalid_argument("gen_drifting_grating: event_rate must be positive");
    if (!(spec.amplitude >= 0))
        throw std::invalid_argument("gen_drifting_grating: amplitude must be nonnegative");

    GratingResult res;
    res.events.width = std::uint16_t(spec.width);
    res.events.height = std::uint16_t(spec.height);
    res.vx = spec.velocity * std::cos(spec.theta);
    res.vy = spec.velocity * std::sin(spec.theta);

    double nx = std::cos(spec.theta), ny = std::sin(spec.theta);
    double level = 2 * spec.amplitude / spec.event_rate;  // intensity per event
    std::size_t npix = std::size_t(spec.width) * std::size_t(spec.height);
    std::vector<double> ref(npix);

    auto intensity = [&](int x, int y, double t) {
        double d = x * nx + y * ny;
        return spec.amplitude * std::cos(spec.omega_x * (d - spec.velocity * t));
    };

    for (int y = 0; y < spec.height; ++y)
        for (int x = 0; x < spec.width; ++x)
            ref[std::size_t(y) * std::size_t(spec.width) + std::size_t(x)] = intensity(x, y, 0.0);

    long long steps = std::llround(spec.duration / spec.gen_dt);
    for (long long k = 1; k <= steps; ++k) {
        double t = double(k) * spec.gen_dt;
        std::int64_t t_us = std::int64_t(std::llround(t * 1e6));
        for (int y = 0; y < spec.height; ++y) {
            for (int x = 0; x < spec.width; ++x) {
                std::size_t i = std::size_t(y) * std::size_t(spec.width) + std::size_t(x);
                double cur = intensity(x, y, t);
                while (cur - ref[i] >= level) {
                    res.events.events.push_back(
                        {t_us, std::uint16_t(x), std::uint16_t(y), std::int8_t(1)});
                    ref[i] += level;
                }
                while (ref[i] - cur >= level) {
                    res.events.events.push_back(
                        {t_us, std::uint16_t(x), std::uint16_t(y), std::int8_t(-1)});
                    ref[i] -= level;
                }
            }
        }
    }
    return res;
}

FlowField read_flow_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open: " + path);
    std::string line;
    int lineno = 0;
    if (!std::getline(in, line)) throw IoError(path + ": empty file");
    ++lineno;
    if (line != "x,y,u,v,valid")
        throw IoError(path + ":1: expected header 'x,y,u,v,valid'");

    struct Row {
        long long x, y;
        double u, v;
        int valid;
    };
    std::vector<Row> rows;
    long long max_x = -1, max_y = -1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        auto fields = split_csv(line);
        if (fields.size() != 5)
            throw IoError(path + ":" + std::to_string(lineno) + ": expected 5 fields");
        Row r;
        r.x = parse_ll(fields[0], path, lineno);
        r.y = parse_ll(fields[1], path, lineno);
        r.u = parse_dbl(fields[2], path, lineno);
        r.v = parse_dbl(fields[3], path, lineno);
        r.valid = int(parse_ll(fields[4], path, lineno));
        if (r.x < 0 || r.y < 0)
            throw IoError(path + ":" + std::to_string(lineno) + ": negative coordinates");
        if (r.valid != 0 && r.valid != 1)
            throw IoError(path + ":" + std::to_string(lineno) + ": valid must be 0 or 1");
        max_x = std::max(max_x, r.x);
        max_y = std::max(max_y, r.y);
        rows.push_back(r);
    }
    if (rows.empty()) throw IoError(path + ": no flow records");
    FlowField f;
    f.width = int(max_x + 1);
    f.height = int(max_y + 1);
    std::size_t npix = std::size_t(f.width) * std::size_t(f.height);
    if (rows.size() != npix)
        throw IoError(path + ": expected " + std::to_string(npix) + " records for a full " +
                      std::to_string(f.width) + "x" + std::to_string(f.height) + " grid, got " +
                      std::to_string(rows.size()));
    f.u.assign(npix, 0.0);
    f.v.assign(npix, 0.0);
    f.valid.assign(npix, 0);
    for (const Row& r : rows) {
        std::size_t i = f.idx(int(r.x), int(r.y));
        f.u[i] = r.u;
        f.v[i] = r.v;
        f.valid[i] = std::uint8_t(r.valid);
    }
    return f;
}

void write_flow_csv(const std::string& path, const FlowField& f) {
    std::string out = "x,y,u,v,valid\n";
    for (int y = 0; y < f.height; ++y) {
        for (int x = 0; x < f.width; ++x) {
            std::size_t i = f.idx(x, y);
            out += std::to_string(x);
            out += ',';
            out += std::to_string(y);
            out += ',';
            out += format_double(f.u[i]);
            out += ',';
            out += format_double(f.v[i]);
            out += ',';
            out += f.valid[i] ? '1' : '0';
            out += '\n';
        }
    }
    write_text_file(path, out);
}

namespace {

void hsv_to_rgb(double h, double s, double v, std::uint8_t rgb[3]) {
    double r = 0, g = 0, b = 0;
    double i = std::floor(h * 6);
    double f = h * 6 - i;
    double p = v * (1 - s), q = v * (1 - f * s), t = v * (1 - (1 - f) * s);
    switch (int(i) % 6) {
        case 0: r = v; g = t; b = p; break;
        case 1: r = q; g = v; b = p; break;
        case 2: r = p; g = v; b = t; break;
        case 3: r = p; g = q; b = v; break;
        case 4: r = t; g = p; b = v; break;
        default: r = v; g = p; b = q; break;
    }
    rgb[0] = std::uint8_t(std::clamp(r, 0.0, 1.0) * 255.0 + 0.5);
    rgb[1] = std::uint8_t(std::clamp(g, 0.0, 1.0) * 255.0 + 0.5);
    rgb[2] = std::uint8_t(std::clamp(b, 0.0, 1.0) * 255.0 + 0.5);
}

}  // namespace

void write_flow_ppm(const std::string& path, const FlowField& f, double max_mag) {
    if (max_mag <= 0) {
        for (std::size_t i = 0; i < f.u.size(); ++i)
            if (f.valid[i]) max_mag = std::max(max_mag, std::hypot(f.u[i], f.v[i]));
        if (max_mag <= 0) max_mag = 1;
    }
    std::string out = "P6\n" + std::to_string(f.width) + " " + std::to_string(f.height) + "\n255\n";
    for (int y = 0; y < f.height; ++y) {
        for (int x = 0; x < f.width; ++x) {
            std::size_t i = f.idx(x, y);
            std::uint8_t rgb[3] = {0, 0, 0};
            if (f.valid[i]) {
                double ang = std::atan2(f.v[i], f.u[i]);  // direction -> hue
                double hue = (ang + kPi) / (2 * kPi);
                if (hue >= 1) hue -= 1;
                double mag = std::min(1.0, std::hypot(f.u[i], f.v[i]) / max_mag);
                hsv_to_rgb(hue, 1.0, mag, rgb);
            }
            out.push_back(char(rgb[0]));
            out.push_back(char(rgb[1]));
            out.push_back(char(rgb[2]));
        }
    }
    write_text_file(path, out);
}

}  // namespace resonet
