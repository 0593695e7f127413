#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace resonet {

// Thrown by readers/validators; message carries the offending path and, for
// record formats, the 1-based line or record number.
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct AudioBuffer {
    std::vector<double> samples;  // normalized to [-1, 1]
    double sample_rate = 16000;
    std::string source;
};

// 16-bit PCM mono only; anything else is an error, resampling is out of scope.
AudioBuffer read_wav(const std::string& path);
void write_wav(const std::string& path, const AudioBuffer& audio);

// Linear instantaneous-frequency sweep f0 -> f1, phase-continuous.
AudioBuffer gen_chirp(double f0, double f1, double duration, double sample_rate,
                      double amplitude);

struct DvsEvent {
    std::int64_t t = 0;  // microseconds
    std::uint16_t x = 0;
    std::uint16_t y = 0;
    std::int8_t polarity = 1;  // +1 or -1
};

struct EventFile {
    std::uint16_t width = 0;
    std::uint16_t height = 0;
    std::vector<DvsEvent> events;  // nondecreasing t, in-bounds coords
};

void validate_events(const EventFile& ef);

// CSV: header "t_us,x,y,polarity", one record per line.
EventFile read_events_csv(const std::string& path);
void write_events_csv(const std::string& path, const EventFile& ef);

// Packed little-endian binary with a small header; same validation rules.
EventFile read_events_bin(const std::string& path);
void write_events_bin(const std::string& path, const EventFile& ef);

// Thresholded drifting sinusoid I(p,t) = A*cos(omega_x*(p.n - velocity*t)).
// Each pixel runs a contrast-crossing detector: an event fires every time the
// intensity moves event_rate'ths of the peak-to-peak swing from its last
// reference level. Doubling the velocity doubles the expected event count.
struct GratingSpec {
    int width = 128;
    int height = 128;
    double omega_x = 6 * 3.14159265358979323846 / 256;  // rad/pix
    double theta = 0;                                   // orientation of n
    double velocity = 170.0;                            // pix/s along n
    double duration = 1.0;                              // s
    double event_rate = 2.0;                            // levels per 2A swing
    double amplitude = 1.0;
    double gen_dt = 1e-3;  // generator sampling step, s
};

struct GratingResult {
    EventFile events;
    double vx = 0, vy = 0;  // attached ground truth, pix/s
};

GratingResult gen_drifting_grating(const GratingSpec& spec);

// Dense flow maps (u,v in pix/s) with a validity mask; CSV round-trippable.
struct FlowField {
    int width = 0;
    int height = 0;
    std::vector<double> u, v;          // size width*height
    std::vector<std::uint8_t> valid;   // 0/1
    std::size_t idx(int x, int y) const { return std::size_t(y) * std::size_t(width) + std::size_t(x); }
};

FlowField read_flow_csv(const std::string& path);
void write_flow_csv(const std::string& path, const FlowField& f);

// Color-wheel rendering: hue = direction, brightness = magnitude relative to
// max_mag (auto-scaled when max_mag <= 0), invalid pixels black.
void write_flow_ppm(const std::string& path, const FlowField& f, double max_mag = 0);

// Shared helpers for deterministic text output.
std::string format_double(double x);  // shortest round-trippable decimal form
void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

}  // namespace resonet
