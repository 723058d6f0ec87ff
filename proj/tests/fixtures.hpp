#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

namespace wombat::testing {

/// Deterministic pseudo-random vector for `word`, written with enough digits
/// to round-trip through binary32.
inline std::vector<float> synthetic_vector(const std::string& word, int dims, std::uint32_t salt = 0)
{
    std::seed_seq seq(word.begin(), word.end());
    std::vector<std::uint32_t> seed(1);
    seq.generate(seed.begin(), seed.end());
    std::mt19937 rng(seed[0] ^ salt);
    std::uniform_real_distribution<float> dist(-1.0f, 1.0f);
    std::vector<float> v(static_cast<std::size_t>(dims));
    for (auto& x : v) x = dist(rng);
    return v;
}

inline std::filesystem::path write_wec_text(const std::filesystem::path& path, const std::vector<std::string>& words,
                                            int dims, bool header = false, std::uint32_t salt = 0)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (header) out << words.size() << ' ' << dims << '\n';
    char buf[32];
    for (const auto& w : words) {
        out << w;
        for (float f : synthetic_vector(w, dims, salt)) {
            std::snprintf(buf, sizeof buf, " %.9g", static_cast<double>(f));
            out << buf;
        }
        out << '\n';
    }
    return path;
}

inline const std::vector<std::string>& seven_wec_ids()
{
    static const std::vector<std::string> ids{
        "algo:glove;dataset:6b;dims:50;fold:1;unit:token",   "algo:glove;dataset:6b;dims:100;fold:1;unit:token",
        "algo:glove;dataset:6b;dims:200;fold:1;unit:token",  "algo:glove;dataset:6b;dims:300;fold:1;unit:token",
        "algo:glove;dataset:42b;dims:300;fold:1;unit:token", "algo:glove;dataset:840b;dims:300;fold:0;unit:token",
        "algo:w2v;dataset:googlenews;dims:300;fold:0;unit:token",
    };
    return ids;
}

inline const char* seven_wec_query()
{
    return "algo:glove;dataset:6b;dims:{50,100,200,300};fold:1;unit:token&"
           "algo:glove;dataset:42b;dims:300;fold:1;unit:token&"
           "algo:glove;dataset:840b;dims:300;fold:0;unit:token&"
           "algo:w2v;dataset:googlenews;dims:300;fold:0;unit:token";
}

} // namespace wombat::testing
