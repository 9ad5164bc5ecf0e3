#pragma once

#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "gazehmm/gaze_data.hpp"

namespace testutil {

inline gazehmm::GazeRecording recording_from(const std::vector<gazehmm::Vec2>& pos, double rate_hz = 1000.0) {
    gazehmm::GazeRecording rec;
    rec.rate_hz = rate_hz;
    for (std::size_t i = 0; i < pos.size(); ++i) {
        rec.samples.push_back({static_cast<double>(i) * 1000.0 / rate_hz, pos[i].x, pos[i].y, true});
    }
    return rec;
}

inline gazehmm::GazeRecording recording_of(std::size_t n, const std::function<gazehmm::Vec2(std::size_t)>& f,
                                           double rate_hz = 1000.0) {
    std::vector<gazehmm::Vec2> pos(n);
    for (std::size_t i = 0; i < n; ++i) pos[i] = f(i);
    return recording_from(pos, rate_hz);
}

inline std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

inline void spit(const std::filesystem::path& p, const std::string& body) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    out << body;
}

// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
    auto d = std::filesystem::temp_directory_path() / ("gazehmm_test_" + name);
    std::filesystem::remove_all(d);
    std::filesystem::create_directories(d);
    return d;
}

}  // namespace testutil
