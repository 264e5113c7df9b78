#include "mvm/net/checkpoint.hpp"

#include <json.hpp>

#include <cstring>
#include <fstream>

namespace mvm::net {

namespace {

using nlohmann::json;

constexpr char kMagic[8] = {'M', 'V', 'M', 'C', 'K', 'P', 'T', '\n'};

json config_to_json(const NetworkConfig& c) {
    return json{{"base_channels", c.base_channels},
                {"depth", c.depth},
                {"independent_encoders", c.independent_encoders},
                {"independent_decoders", c.independent_decoders},
                {"shared_bottleneck", c.shared_bottleneck},
                {"use_attention", c.use_attention}};
}

NetworkConfig config_from_json(const json& j) {
    NetworkConfig c;
    c.base_channels = j.at("base_channels").get<int>();
    c.depth = j.at("depth").get<int>();
    c.independent_encoders = j.at("independent_encoders").get<bool>();
    c.independent_decoders = j.at("independent_decoders").get<bool>();
    c.shared_bottleneck = j.at("shared_bottleneck").get<bool>();
    c.use_attention = j.at("use_attention").get<bool>();
    return c;
}

struct Header {
    json j;
    std::streamoff blob_start = 0;
};

Header read_header(std::ifstream& in, const std::filesystem::path& path) {
    char magic[8];
    in.read(magic, 8);
    if (!in || std::memcmp(magic, kMagic, 8) != 0)
        throw IoError("not a checkpoint file: " + path.string());
    uint64_t json_len = 0;
    in.read(reinterpret_cast<char*>(&json_len), sizeof(json_len));
    std::string text(json_len, '\0');
    in.read(text.data(), static_cast<std::streamsize>(json_len));
    if (!in) throw IoError("truncated checkpoint header: " + path.string());
    Header h;
    h.j = json::parse(text);
    h.blob_start = in.tellg();
    const std::string version = h.j.at("version").get<std::string>();
    if (version != "1")
        throw IoError("unsupported checkpoint version \"" + version + "\" in " + path.string());
    return h;
}

CheckpointMeta meta_from_json(const json& j) {
    CheckpointMeta meta;
    meta.step = j.at("step").get<int64_t>();
    meta.seed = j.at("seed").get<uint64_t>();
    meta.loss_history = j.at("loss_history").get<std::vector<double>>();
    return meta;
}

}  // namespace

void save_checkpoint(MTAttentionUNet<float>& model, const CheckpointMeta& meta,
                     const std::filesystem::path& path) {
    json params = json::array();
    std::vector<float> blob;
    model.visit_params([&](const std::string& name, Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic,
                                                                  Eigen::RowMajor>& w,
                           auto&) {
        params.push_back(json{{"name", name},
                              {"rows", w.rows()},
                              {"cols", w.cols()},
                              {"offset", blob.size()}});
        blob.insert(blob.end(), w.data(), w.data() + w.size());
    });

    json header;
    header["version"] = "1";
    header["config"] = config_to_json(model.config());
    header["params"] = params;
    header["meta"] = {{"step", meta.step}, {"seed", meta.seed}, {"loss_history", meta.loss_history}};
    const std::string text = header.dump();

    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open for writing: " + path.string());
    out.write(kMagic, 8);
    const uint64_t json_len = text.size();
    out.write(reinterpret_cast<const char*>(&json_len), sizeof(json_len));
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    out.write(reinterpret_cast<const char*>(blob.data()),
              static_cast<std::streamsize>(blob.size() * sizeof(float)));
    if (!out) throw IoError("short write: " + path.string());
}

LoadedCheckpoint load_checkpoint(MTAttentionUNet<float>& model, const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("missing checkpoint: " + path.string());
    Header h = read_header(in, path);

    LoadedCheckpoint loaded;
    loaded.config = config_from_json(h.j.at("config"));
    loaded.meta = meta_from_json(h.j.at("meta"));
    if (!(loaded.config == model.config()))
        throw IoError("checkpoint config does not match model config: " + path.string());

    std::map<std::string, std::tuple<Index, Index, size_t>> index;
    for (const auto& p : h.j.at("params"))
        index[p.at("name").get<std::string>()] = {p.at("rows").get<Index>(), p.at("cols").get<Index>(),
                                                  p.at("offset").get<size_t>()};

    in.seekg(0, std::ios::end);
    const auto file_end = in.tellg();
    const size_t blob_floats = static_cast<size_t>(file_end - h.blob_start) / sizeof(float);
    in.seekg(h.blob_start);
    std::vector<float> blob(blob_floats);
    in.read(reinterpret_cast<char*>(blob.data()),
            static_cast<std::streamsize>(blob_floats * sizeof(float)));
    if (!in) throw IoError("truncated checkpoint blob: " + path.string());

    size_t consumed = 0;
    model.visit_params([&](const std::string& name, auto& w, auto&) {
        auto it = index.find(name);
        if (it == index.end()) throw IoError("checkpoint missing parameter " + name);
        auto [rows, cols, offset] = it->second;
        if (rows != w.rows() || cols != w.cols())
            throw IoError("checkpoint parameter " + name + " has wrong shape");
        if (offset + static_cast<size_t>(w.size()) > blob.size())
            throw IoError("checkpoint blob too short for " + name);
        std::memcpy(w.data(), blob.data() + offset, static_cast<size_t>(w.size()) * sizeof(float));
        consumed += static_cast<size_t>(w.size());
    });
    if (consumed != blob.size())
        throw IoError("checkpoint blob size mismatch (extra parameters?) in " + path.string());
    return loaded;
}

LoadedCheckpoint peek_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("missing checkpoint: " + path.string());
    Header h = read_header(in, path);
    LoadedCheckpoint loaded;
    loaded.config = config_from_json(h.j.at("config"));
    loaded.meta = meta_from_json(h.j.at("meta"));
    return loaded;
}

}  // namespace mvm::net
