#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace reconvat {

struct AudioClip {
    std::vector<double> samples;
    int sample_rate = 0;
};

struct MelSpectrogram {
    Eigen::MatrixXd values;   // T x F
    int hop_samples = 512;
    int window_samples = 2048;
    int n_mels = 229;
    int sample_rate = 16000;

    Eigen::Index frames() const { return values.rows(); }
    Eigen::Index bins() const { return values.cols(); }
};

namespace audio {

inline constexpr int kTargetRate = 16000;
inline constexpr int kSegmentSamples = 327680;
inline constexpr int kWindowSize = 2048;
inline constexpr int kHopSize = 512;
inline constexpr int kNumMels = 229;
inline constexpr double kLogFloor = 1e-8;

// ---- WAV ----

namespace detail {

inline void write_u32(std::ostream& os, uint32_t v) {
    char b[4] = {char(v & 0xff), char((v >> 8) & 0xff), char((v >> 16) & 0xff),
                 char((v >> 24) & 0xff)};
    os.write(b, 4);
}
inline void write_u16(std::ostream& os, uint16_t v) {
    char b[2] = {char(v & 0xff), char((v >> 8) & 0xff)};
    os.write(b, 2);
}
inline uint32_t read_u32(std::istream& is) {
    unsigned char b[4];
    is.read(reinterpret_cast<char*>(b), 4);
    return uint32_t(b[0]) | uint32_t(b[1]) << 8 | uint32_t(b[2]) << 16 | uint32_t(b[3]) << 24;
}
inline uint16_t read_u16(std::istream& is) {
    unsigned char b[2];
    is.read(reinterpret_cast<char*>(b), 2);
    return uint16_t(b[0]) | uint16_t(b[1]) << 8;
}

}  // namespace detail

/// Reads a mono or stereo PCM WAV (16-bit int or 32-bit float).
/// Stereo is downmixed by channel averaging.
inline AudioClip read_wav(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open wav file: " + path);
    char tag[4];
    is.read(tag, 4);
    if (std::strncmp(tag, "RIFF", 4) != 0)
        throw std::runtime_error("not a RIFF file: " + path);
    detail::read_u32(is);
    is.read(tag, 4);
    if (std::strncmp(tag, "WAVE", 4) != 0)
        throw std::runtime_error("not a WAVE file: " + path);

    uint16_t format = 0, channels = 0, bits = 0;
    uint32_t rate = 0;
    std::vector<double> mono;
    while (is.read(tag, 4)) {
        uint32_t chunk = detail::read_u32(is);
        if (std::strncmp(tag, "fmt ", 4) == 0) {
            format = detail::read_u16(is);
            channels = detail::read_u16(is);
            rate = detail::read_u32(is);
            detail::read_u32(is);  // byte rate
            detail::read_u16(is);  // block align
            bits = detail::read_u16(is);
            if (chunk > 16) is.seekg(chunk - 16, std::ios::cur);
        } else if (std::strncmp(tag, "data", 4) == 0) {
            if (channels == 0) throw std::runtime_error("wav data before fmt: " + path);
            std::vector<char> raw(chunk);
            is.read(raw.data(), chunk);
            size_t bytes_per = bits / 8;
            size_t n_frames = chunk / (bytes_per * channels);
            mono.resize(n_frames);
            for (size_t i = 0; i < n_frames; ++i) {
                double acc = 0.0;
                for (uint16_t c = 0; c < channels; ++c) {
                    const char* p = raw.data() + (i * channels + c) * bytes_per;
                    if (format == 1 && bits == 16) {
                        int16_t s;
                        std::memcpy(&s, p, 2);
                        acc += s / 32768.0;
                    } else if (format == 3 && bits == 32) {
                        float f;
                        std::memcpy(&f, p, 4);
                        acc += f;
                    } else {
                        throw std::runtime_error("unsupported wav encoding in " + path);
                    }
                }
                mono[i] = acc / channels;
            }
        } else {
            is.seekg(chunk + (chunk & 1), std::ios::cur);
        }
    }
    if (mono.empty()) throw std::runtime_error("wav has no data chunk: " + path);
    return AudioClip{std::move(mono), static_cast<int>(rate)};
}

/// Writes 16-bit mono PCM. Samples are clipped to [-1, 1).
inline void write_wav(const std::string& path, const AudioClip& clip) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write wav file: " + path);
    uint32_t data_bytes = static_cast<uint32_t>(clip.samples.size() * 2);
    os.write("RIFF", 4);
    detail::write_u32(os, 36 + data_bytes);
    os.write("WAVE", 4);
    os.write("fmt ", 4);
    detail::write_u32(os, 16);
    detail::write_u16(os, 1);  // PCM
    detail::write_u16(os, 1);  // mono
    detail::write_u32(os, static_cast<uint32_t>(clip.sample_rate));
    detail::write_u32(os, static_cast<uint32_t>(clip.sample_rate * 2));
    detail::write_u16(os, 2);
    detail::write_u16(os, 16);
    os.write("data", 4);
    detail::write_u32(os, data_bytes);
    for (double s : clip.samples) {
        double c = std::clamp(s, -1.0, 32767.0 / 32768.0);
        int16_t q = static_cast<int16_t>(std::lrint(c * 32768.0));
        char b[2] = {char(q & 0xff), char((q >> 8) & 0xff)};
        os.write(b, 2);
    }
    if (!os) throw std::runtime_error("wav write failed: " + path);
}

// ---- resampling ----

/// Rational-rate resampler using a Hann-windowed sinc kernel evaluated
/// at fractional positions. Cutoff at the lower of the two Nyquists.
inline AudioClip resample(const AudioClip& clip, int target_rate) {
    if (clip.samples.empty()) throw std::invalid_argument("resample: empty clip");
    if (clip.sample_rate <= 0 || target_rate <= 0)
        throw std::invalid_argument("resample: rates must be positive");
    if (clip.sample_rate == target_rate) return clip;

    const double ratio = static_cast<double>(target_rate) / clip.sample_rate;
    const size_t out_len = static_cast<size_t>(
        std::llround(static_cast<double>(clip.samples.size()) * ratio));
    const double cutoff = std::min(1.0, ratio);  // relative to source Nyquist
    const int zero_crossings = 32;
    const double half_width = zero_crossings / cutoff;

    std::vector<double> out(out_len, 0.0);
    const auto& x = clip.samples;
    const auto n = static_cast<long long>(x.size());
    for (size_t i = 0; i < out_len; ++i) {
        double center = static_cast<double>(i) / ratio;
        long long lo = static_cast<long long>(std::ceil(center - half_width));
        long long hi = static_cast<long long>(std::floor(center + half_width));
        lo = std::max(lo, 0LL);
        hi = std::min(hi, n - 1);
        double acc = 0.0;
        for (long long k = lo; k <= hi; ++k) {
            double dt = (static_cast<double>(k) - center) * cutoff;
            double sinc = dt == 0.0 ? 1.0
                                    : std::sin(std::numbers::pi * dt) / (std::numbers::pi * dt);
            double u = (static_cast<double>(k) - center) / half_width;  // in [-1, 1]
            double win = 0.5 * (1.0 + std::cos(std::numbers::pi * u));
            acc += x[static_cast<size_t>(k)] * sinc * win;
        }
        out[i] = acc * cutoff;
    }
    return AudioClip{std::move(out), target_rate};
}

/// Random contiguous segment of exactly length_samples. Shorter clips are
/// zero-padded at the end; equal-length clips come back unchanged.
inline AudioClip crop_segment(const AudioClip& clip, size_t length_samples, uint64_t seed) {
    if (length_samples < 1) throw std::invalid_argument("crop_segment: length must be >= 1");
    std::vector<double> out(length_samples, 0.0);
    if (clip.samples.size() <= length_samples) {
        std::copy(clip.samples.begin(), clip.samples.end(), out.begin());
    } else {
        std::mt19937_64 rng(seed);
        std::uniform_int_distribution<size_t> dist(0, clip.samples.size() - length_samples);
        size_t start = dist(rng);
        std::copy_n(clip.samples.begin() + static_cast<long>(start), length_samples,
                    out.begin());
    }
    return AudioClip{std::move(out), clip.sample_rate};
}

// ---- spectrogram ----

namespace detail {

/// In-place iterative radix-2 FFT.
inline void fft(std::vector<std::complex<double>>& a) {
    const size_t n = a.size();
    if (n == 0 || (n & (n - 1)) != 0)
        throw std::invalid_argument("fft: size must be a power of two");
    for (size_t i = 1, j = 0; i < n; ++i) {
        size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (size_t len = 2; len <= n; len <<= 1) {
        double ang = -2.0 * std::numbers::pi / static_cast<double>(len);
        std::complex<double> wlen(std::cos(ang), std::sin(ang));
        for (size_t i = 0; i < n; i += len) {
            std::complex<double> w(1.0, 0.0);
            for (size_t k = 0; k < len / 2; ++k) {
                auto u = a[i + k];
                auto v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
                w *= wlen;
            }
        }
    }
}

inline double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
inline double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

/// Triangular mel filterbank, (n_fft/2+1) x n_mels.
inline Eigen::MatrixXd mel_filterbank(int n_fft, int sample_rate, int n_mels, double fmin,
                                      double fmax) {
    const int n_bins = n_fft / 2 + 1;
    Eigen::MatrixXd fb = Eigen::MatrixXd::Zero(n_bins, n_mels);
    const double mlo = hz_to_mel(fmin);
    const double mhi = hz_to_mel(fmax);
    std::vector<double> centers(n_mels + 2);
    for (int m = 0; m < n_mels + 2; ++m)
        centers[m] = mel_to_hz(mlo + (mhi - mlo) * m / (n_mels + 1));
    for (int b = 0; b < n_bins; ++b) {
        double f = static_cast<double>(b) * sample_rate / n_fft;
        for (int m = 0; m < n_mels; ++m) {
            double left = centers[m], mid = centers[m + 1], right = centers[m + 2];
            if (f > left && f < right) {
                fb(b, m) = f <= mid ? (f - left) / (mid - left) : (right - f) / (right - mid);
            }
        }
    }
    return fb;
}

/// Mirror-reflect index into [0, n).
inline long reflect_index(long i, long n) {
    if (n == 1) return 0;
    long period = 2 * (n - 1);
    i = ((i % period) + period) % period;
    return i < n ? i : period - i;
}

}  // namespace detail

inline constexpr double kMelFmin = 30.0;
inline constexpr double kMelFmax = 8000.0;

/// Magnitude Mel spectrogram with Hann window and centered (reflect-padded)
/// framing: frame t is centered at sample t*hop, T = ceil(len/hop).
inline MelSpectrogram mel_spectrogram(const AudioClip& clip, int window = kWindowSize,
                                      int hop = kHopSize, int n_mels = kNumMels) {
    if (clip.samples.size() < static_cast<size_t>(window))
        throw std::invalid_argument("mel_spectrogram: clip shorter than one window");
    const long n = static_cast<long>(clip.samples.size());
    const long t_frames = (n + hop - 1) / hop;

    std::vector<double> hann(window);
    for (int i = 0; i < window; ++i)
        hann[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * i / window);

    Eigen::MatrixXd fb =
        detail::mel_filterbank(window, clip.sample_rate, n_mels, kMelFmin, kMelFmax);
    const int n_bins = window / 2 + 1;

    Eigen::MatrixXd mel(t_frames, n_mels);
    std::vector<std::complex<double>> buf(window);
    Eigen::RowVectorXd mag(n_bins);
    for (long t = 0; t < t_frames; ++t) {
        long center = t * hop;
        for (int i = 0; i < window; ++i) {
            long idx = detail::reflect_index(center - window / 2 + i, n);
            buf[i] = clip.samples[static_cast<size_t>(idx)] * hann[i];
        }
        detail::fft(buf);
        for (int b = 0; b < n_bins; ++b) mag[b] = std::abs(buf[b]);
        mel.row(t) = mag * fb;
    }
    MelSpectrogram out;
    out.values = std::move(mel);
    out.hop_samples = hop;
    out.window_samples = window;
    out.n_mels = n_mels;
    out.sample_rate = clip.sample_rate;
    return out;
}

/// Log compression followed by per-spectrogram min-max normalization into
/// [0,1]. A constant matrix (max == min) maps to all zeros.
inline MelSpectrogram log_normalize(const MelSpectrogram& spec) {
    MelSpectrogram out = spec;
    Eigen::ArrayXXd logged = (spec.values.array() + kLogFloor).log();
    double lo = logged.minCoeff();
    double hi = logged.maxCoeff();
    if (hi - lo <= 0.0) {
        out.values.setZero();
    } else {
        out.values = ((logged - lo) / (hi - lo)).matrix();
    }
    return out;
}

/// Full front-end: resample to 16 kHz, extract Mel, normalize.
inline MelSpectrogram preprocess(const AudioClip& clip) {
    AudioClip at16 = clip.sample_rate == kTargetRate ? clip : resample(clip, kTargetRate);
    return log_normalize(mel_spectrogram(at16));
}

}  // namespace audio
}  // namespace reconvat
