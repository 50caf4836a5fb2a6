#pragma once

#include "labels.hpp"

#include <fstream>
#include <stdexcept>
#include <string>

namespace reconvat {
namespace plot {

/// Binary PPM raster of a predicted roll: one pixel row per pitch (low
/// pitches at the bottom), frame channel in green, onset marks in red.
/// Image height is 88 * scale pixels.
inline void write_roll_ppm(const std::string& path, const Eigen::MatrixXd& frame_roll,
                           const Eigen::MatrixXd* onset_roll = nullptr, int scale = 4) {
    if (scale < 1) throw std::invalid_argument("write_roll_ppm: scale must be >= 1");
    const auto t_frames = frame_roll.rows();
    const auto n_pitches = frame_roll.cols();
    const long w = t_frames * scale;
    const long h = n_pitches * scale;
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write image: " + path);
    os << "P6\n" << w << " " << h << "\n255\n";
    std::string row(static_cast<size_t>(w) * 3, '\0');
    for (long y = 0; y < h; ++y) {
        Eigen::Index pitch = n_pitches - 1 - y / scale;  // top row = highest pitch
        for (long x = 0; x < w; ++x) {
            Eigen::Index t = x / scale;
            unsigned char r = 16, g = 16, b = 24;
            if (onset_roll && (*onset_roll)(t, pitch) != 0.0) {
                r = 230; g = 60; b = 40;
            } else if (frame_roll(t, pitch) != 0.0) {
                r = 60; g = 200; b = 90;
            }
            row[static_cast<size_t>(x) * 3] = static_cast<char>(r);
            row[static_cast<size_t>(x) * 3 + 1] = static_cast<char>(g);
            row[static_cast<size_t>(x) * 3 + 2] = static_cast<char>(b);
        }
        os.write(row.data(), static_cast<std::streamsize>(row.size()));
    }
    if (!os) throw std::runtime_error("image write failed: " + path);
}

}  // namespace plot
}  // namespace reconvat
