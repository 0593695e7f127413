#pragma once

#include <cstdint>
#include <cmath>
#include <stdexcept>
#include <string>

namespace resonet {

// Signed two's-complement fixed-point format. All overflow saturates; wrapping
// would silently corrupt oscillator phase.
struct FixedFormat {
    int total_bits = 24;
    int frac_bits = 14;

    bool valid() const {
        return total_bits >= 2 && total_bits <= 32 && frac_bits >= 0 &&
               frac_bits < total_bits;
    }
    void validate() const {
        if (!valid())
            throw std::invalid_argument("FixedFormat: need 2<=total<=32, 0<=frac<total (got " +
                                        std::to_string(total_bits) + "/" +
                                        std::to_string(frac_bits) + ")");
    }

    std::int64_t raw_max() const { return (std::int64_t(1) << (total_bits - 1)) - 1; }
    std::int64_t raw_min() const { return -(std::int64_t(1) << (total_bits - 1)); }
    double quantum() const { return std::ldexp(1.0, -frac_bits); }
    double max_value() const { return double(raw_max()) * quantum(); }
    double min_value() const { return double(raw_min()) * quantum(); }
};

// Counts silent saturation clips so a run can report them afterwards.
struct FixDiag {
    std::uint64_t saturations = 0;
};

inline std::int64_t fx_saturate(std::int64_t raw, const FixedFormat& f, FixDiag* diag) {
    if (raw > f.raw_max()) {
        if (diag) ++diag->saturations;
        return f.raw_max();
    }
    if (raw < f.raw_min()) {
        if (diag) ++diag->saturations;
        return f.raw_min();
    }
    return raw;
}

// Round-to-nearest quantization (ties away from zero). Used when loading
// real-valued inputs and parameters into the engine.
inline std::int64_t fx_quantize(double x, const FixedFormat& f, FixDiag* diag = nullptr) {
    double scaled = x * std::ldexp(1.0, f.frac_bits);
    double r = scaled < 0 ? std::ceil(scaled - 0.5) : std::floor(scaled + 0.5);
    return fx_saturate(std::int64_t(r), f, diag);
}

// Magnitude-truncating quantization (toward zero). Rotation coefficients use
// this so the quantized kernel never exceeds the exact magnitude.
inline std::int64_t fx_quantize_trunc(double x, const FixedFormat& f, FixDiag* diag = nullptr) {
    double scaled = x * std::ldexp(1.0, f.frac_bits);
    return fx_saturate(std::int64_t(std::trunc(scaled)), f, diag);
}

inline double fx_value(std::int64_t raw, const FixedFormat& f) {
    return double(raw) * f.quantum();
}

// Arithmetic rescale of a wide intermediate from frac_from to frac_to bits,
// truncating toward zero. Truncation (not floor) keeps |result| <= |exact|
// for both signs, so decaying states reach exactly zero in finite time.
inline std::int64_t fx_rescale_trunc(std::int64_t wide, int frac_from, int frac_to) {
    int shift = frac_from - frac_to;
    if (shift <= 0) return wide << -shift;
    if (wide >= 0) return wide >> shift;
    return -((-wide) >> shift);
}

// a*b with a single truncating quantization of the wide product.
inline std::int64_t fx_mul(std::int64_t a_raw, const FixedFormat& fa,
                           std::int64_t b_raw, const FixedFormat& fb,
                           const FixedFormat& out, FixDiag* diag) {
    std::int64_t wide = a_raw * b_raw;  // <= 2^62 for any two 32-bit formats
    return fx_saturate(fx_rescale_trunc(wide, fa.frac_bits + fb.frac_bits, out.frac_bits),
                       out, diag);
}

inline std::int64_t fx_add(std::int64_t a_raw, std::int64_t b_raw,
                           const FixedFormat& f, FixDiag* diag) {
    return fx_saturate(a_raw + b_raw, f, diag);
}

// Raw complex pair; both components share one format.
struct FixedComplex {
    std::int64_t re = 0;
    std::int64_t im = 0;
};

// z' = rot*z + a. The complex multiply is evaluated exactly in 64-bit, then
// each component is quantized once (truncating) and the addend folded in
// before a single saturation. One quantization per component keeps the
// fixed-vs-float divergence near one quantum per step.
inline FixedComplex fx_rotate_add(const FixedComplex& z, const FixedFormat& zf,
                                  const FixedComplex& rot, const FixedFormat& rotf,
                                  const FixedComplex& a, FixDiag* diag) {
    int from = rotf.frac_bits + zf.frac_bits;
    std::int64_t re_w = rot.re * z.re - rot.im * z.im;
    std::int64_t im_w = rot.re * z.im + rot.im * z.re;
    FixedComplex out;
    out.re = fx_saturate(fx_rescale_trunc(re_w, from, zf.frac_bits) + a.re, zf, diag);
    out.im = fx_saturate(fx_rescale_trunc(im_w, from, zf.frac_bits) + a.im, zf, diag);
    return out;
}

}  // namespace resonet
