#pragma once

// Checkpoint on disk: a directory holding `manifest.json` (dims, attention
// config, preprocessing mode, vocabulary, tensor names and shapes) and
// `weights.bin` (little-endian float32, tensors in manifest order).

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "causalcat/attention.hpp"
#include "causalcat/discourse.hpp"
#include "causalcat/error.hpp"
#include "causalcat/model.hpp"
#include "causalcat/vocab.hpp"

namespace causalcat {

inline constexpr int kCheckpointVersion = 1;

struct Checkpoint {
    ModelParams params;
    AttentionConfig attention;
    Vocabulary vocab;
    PreprocessMode mode = PreprocessMode::None;
    nlohmann::json hyperparams = nlohmann::json::object();  // informational
};

namespace detail {

inline void append_f32_le(std::string& out, double v) {
    const auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(v));
    for (int b = 0; b < 4; ++b) out.push_back(static_cast<char>((bits >> (8 * b)) & 0xFFu));
}

inline double read_f32_le(const unsigned char* p) {
    std::uint32_t bits = 0;
    for (int b = 0; b < 4; ++b) bits |= static_cast<std::uint32_t>(p[b]) << (8 * b);
    return static_cast<double>(std::bit_cast<float>(bits));
}

inline std::string slurp(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// Writes through a temporary sibling and renames it into place.
inline void write_atomic(const std::filesystem::path& path, const std::string& bytes) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write " + tmp.string());
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        if (!out) throw IoError("write failed: " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

}  // namespace detail

inline nlohmann::json checkpoint_manifest(const Checkpoint& ckpt) {
    nlohmann::json tensors = nlohmann::json::array();
    ckpt.params.for_each([&](const std::string& name, const Matrix& m) {
        tensors.push_back({{"name", name}, {"shape", {m.rows(), m.cols()}}});
    });
    return {{"format", "causalcat-checkpoint"},
            {"version", kCheckpointVersion},
            {"dims", ckpt.params.dims.to_json()},
            {"attention", ckpt.attention.to_json()},
            {"preprocess", std::string(mode_name(ckpt.mode))},
            {"hyperparams", ckpt.hyperparams},
            {"vocab", ckpt.vocab.tokens()},
            {"tensors", tensors}};
}

inline std::string checkpoint_blob(const ModelParams& params) {
    std::string blob;
    blob.reserve(params.parameter_count() * 4);
    params.for_each([&](const std::string&, const Matrix& m) {
        for (Index i = 0; i < m.size(); ++i) detail::append_f32_le(blob, m.data()[i]);
    });
    return blob;
}

inline void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    detail::write_atomic(dir / "weights.bin", checkpoint_blob(ckpt.params));
    detail::write_atomic(dir / "manifest.json", checkpoint_manifest(ckpt).dump(2) + "\n");
}

inline Checkpoint load_checkpoint(const std::filesystem::path& dir) {
    if (!std::filesystem::is_directory(dir)) throw IoError("checkpoint directory not found: " + dir.string());
    Checkpoint ckpt;
    nlohmann::json manifest;
    try {
        manifest = nlohmann::json::parse(detail::slurp(dir / "manifest.json"));
        if (manifest.value("format", "") != "causalcat-checkpoint")
            throw MalformedCheckpoint("not a causalcat checkpoint: " + dir.string());
        if (manifest.at("version").get<int>() != kCheckpointVersion)
            throw MalformedCheckpoint("unsupported checkpoint version");
        const auto dims = ModelDims::from_json(manifest.at("dims"));
        ckpt.params = ModelParams::zeros(dims);
        ckpt.attention = AttentionConfig::from_json(manifest.at("attention"));
        ckpt.mode = parse_mode(manifest.at("preprocess").get<std::string>());
        ckpt.hyperparams = manifest.value("hyperparams", nlohmann::json::object());
        ckpt.vocab = Vocabulary(manifest.at("vocab").get<std::vector<std::string>>());
    } catch (const nlohmann::json::exception& e) {
        throw MalformedCheckpoint(std::string("bad manifest: ") + e.what());
    } catch (const InvalidConfig& e) {
        throw MalformedCheckpoint(std::string("bad manifest: ") + e.what());
    }
    if (static_cast<int>(ckpt.vocab.size()) != ckpt.params.dims.vocab)
        throw MalformedCheckpoint("vocabulary size does not match dims.vocab");

    const auto& tensors = manifest.at("tensors");
    std::size_t t = 0;
    bool shapes_ok = tensors.is_array();
    ckpt.params.for_each([&](const std::string& name, const Matrix& m) {
        if (!shapes_ok || t >= tensors.size()) {
            shapes_ok = false;
            return;
        }
        const auto& e = tensors[t++];
        if (e.value("name", "") != name || e.at("shape") != nlohmann::json{m.rows(), m.cols()}) shapes_ok = false;
    });
    if (!shapes_ok || t != tensors.size()) throw MalformedCheckpoint("tensor list does not match dims");

    const std::string blob = detail::slurp(dir / "weights.bin");
    if (blob.size() != ckpt.params.parameter_count() * 4)
        throw MalformedCheckpoint("weights.bin has " + std::to_string(blob.size()) + " bytes, expected " +
                                  std::to_string(ckpt.params.parameter_count() * 4));
    const auto* p = reinterpret_cast<const unsigned char*>(blob.data());
    ckpt.params.for_each([&](const std::string&, Matrix& m) {
        for (Index i = 0; i < m.size(); ++i, p += 4) m.data()[i] = detail::read_f32_le(p);
    });
    return ckpt;
}

/// Throws IncompatibleCheckpoint when the checkpoint was trained on a
/// different preprocessing mode or attention geometry than requested.
inline void require_compatible(const Checkpoint& ckpt, PreprocessMode mode) {
    if (ckpt.mode != mode)
        throw IncompatibleCheckpoint("checkpoint was trained with preprocessing '" +
                                     std::string(mode_name(ckpt.mode)) + "' but '" + std::string(mode_name(mode)) +
                                     "' was requested");
}

}  // namespace causalcat
