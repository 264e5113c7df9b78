#include "mvm/series.hpp"

#include <json.hpp>

#include <cstring>
#include <fstream>
#include <set>

#include "mvm/sha256.hpp"

namespace mvm {

namespace {

using nlohmann::json;

void check_frame_shape(const ImageF& img, Index h, Index w, const char* field, int t) {
    if (img.rows() != h || img.cols() != w)
        throw ValidationError(std::string("series invariant violated: ") + field + " frame " +
                              std::to_string(t) + " has shape " + std::to_string(img.rows()) + "x" +
                              std::to_string(img.cols()) + ", expected " + std::to_string(h) + "x" +
                              std::to_string(w));
}

std::vector<float> read_f32_file(const std::filesystem::path& path, size_t expected_count) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("missing file: " + path.string());
    in.seekg(0, std::ios::end);
    const auto bytes = static_cast<size_t>(in.tellg());
    if (bytes != expected_count * sizeof(float))
        throw IoError("shape error: " + path.string() + " holds " + std::to_string(bytes / sizeof(float)) +
                      " floats, manifest implies " + std::to_string(expected_count));
    in.seekg(0);
    std::vector<float> data(expected_count);
    in.read(reinterpret_cast<char*>(data.data()), static_cast<std::streamsize>(bytes));
    if (!in) throw IoError("short read: " + path.string());
    return data;
}

void write_f32_file(const std::filesystem::path& path, const std::vector<float>& data) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open for writing: " + path.string());
    out.write(reinterpret_cast<const char*>(data.data()),
              static_cast<std::streamsize>(data.size() * sizeof(float)));
    if (!out) throw IoError("short write: " + path.string());
}

}  // namespace

void validate_series(const MVMSeries& series) {
    const int t = series.frames();
    if (t < 1) throw ValidationError("series invariant violated: magnitude has no frames");
    const Index h = series.rows(), w = series.cols();
    if (h < 32 || w < 32)
        throw ValidationError("series invariant violated: magnitude frames must be at least 32x32, got " +
                              std::to_string(h) + "x" + std::to_string(w));
    if (static_cast<int>(series.phase.size()) != t)
        throw ValidationError("series invariant violated: phase has " + std::to_string(series.phase.size()) +
                              " frames, magnitude has " + std::to_string(t));
    if (static_cast<int>(series.mask.size()) != t)
        throw ValidationError("series invariant violated: mask has " + std::to_string(series.mask.size()) +
                              " frames, magnitude has " + std::to_string(t));
    for (int i = 0; i < t; ++i) {
        check_frame_shape(series.magnitude[static_cast<size_t>(i)], h, w, "magnitude", i);
        for (int d = 0; d < 3; ++d)
            check_frame_shape(series.phase[static_cast<size_t>(i)][static_cast<size_t>(d)], h, w, "phase", i);
        check_frame_shape(series.mask[static_cast<size_t>(i)], h, w, "mask", i);

        const ImageF& mag = series.magnitude[static_cast<size_t>(i)];
        if (!all_finite(mag) || (mag < 0.f).any() || (mag > 1.f).any())
            throw ValidationError("series invariant violated: magnitude frame " + std::to_string(i) +
                                  " outside [0,1]");
        for (int d = 0; d < 3; ++d) {
            const ImageF& ph = series.phase[static_cast<size_t>(i)][static_cast<size_t>(d)];
            if (!all_finite(ph) || (ph < -1.f).any() || (ph > 1.f).any())
                throw ValidationError("series invariant violated: phase frame " + std::to_string(i) +
                                      " direction " + std::to_string(d) + " outside [-1,1]");
        }
        const ImageF& m = series.mask[static_cast<size_t>(i)];
        if (!((m == 0.f) || (m == 1.f)).all())
            throw ValidationError("series invariant violated: mask frame " + std::to_string(i) +
                                  " is not binary");
    }
    if (series.pixel_spacing_mm.x() <= 0.f || series.pixel_spacing_mm.y() <= 0.f)
        throw ValidationError("series invariant violated: pixel_spacing_mm must be positive");
    if ((series.venc_mm_per_s.array() <= 0.f).any())
        throw ValidationError("series invariant violated: venc_mm_per_s must be positive");
}

bool series_degenerate(const MVMSeries& series) {
    for (const ImageF& m : series.mask)
        if (!(m > 0.5f).any()) return true;
    return false;
}

MVMSeries resample_bilinear(const MVMSeries& series, int factor) {
    if (factor < 1) throw ArgumentError("resample factor must be >= 1, got " + std::to_string(factor));
    MVMSeries out;
    out.subject_id = series.subject_id;
    out.slice_id = series.slice_id;
    out.pixel_spacing_mm = series.pixel_spacing_mm / static_cast<float>(factor);
    out.venc_mm_per_s = series.venc_mm_per_s;
    out.magnitude.reserve(series.magnitude.size());
    out.phase.reserve(series.phase.size());
    out.mask.reserve(series.mask.size());
    for (const ImageF& m : series.magnitude) out.magnitude.push_back(upsample_bilinear(m, factor));
    for (const auto& dirs : series.phase)
        out.phase.push_back({upsample_bilinear(dirs[0], factor), upsample_bilinear(dirs[1], factor),
                             upsample_bilinear(dirs[2], factor)});
    for (const ImageF& m : series.mask) out.mask.push_back(upsample_nearest(m, factor));
    return out;
}

void validate_split(const DatasetSplit& split) {
    std::set<std::string> train_subjects, val_subjects, test_subjects;
    auto collect = [](const std::vector<std::string>& paths, std::set<std::string>& subjects) {
        for (const auto& p : paths) {
            std::ifstream in(std::filesystem::path(p) / "manifest.json");
            if (!in) throw IoError("missing manifest: " + p);
            json manifest = json::parse(in);
            subjects.insert(manifest.at("subject_id").get<std::string>());
        }
    };
    collect(split.train, train_subjects);
    collect(split.val, val_subjects);
    collect(split.test, test_subjects);
    for (const auto& s : train_subjects) {
        if (val_subjects.count(s))
            throw ValidationError("split invariant violated: subject " + s + " in both train and val");
        if (test_subjects.count(s))
            throw ValidationError("split invariant violated: subject " + s + " in both train and test");
    }
    for (const auto& s : val_subjects)
        if (test_subjects.count(s))
            throw ValidationError("split invariant violated: subject " + s + " in both val and test");
}

DatasetSplit load_split(const std::filesystem::path& json_path) {
    std::ifstream in(json_path);
    if (!in) throw IoError("missing split file: " + json_path.string());
    json j = json::parse(in);
    DatasetSplit split;
    split.train = j.at("train").get<std::vector<std::string>>();
    split.val = j.at("val").get<std::vector<std::string>>();
    split.test = j.at("test").get<std::vector<std::string>>();
    return split;
}

void save_split(const DatasetSplit& split, const std::filesystem::path& json_path) {
    json j;
    j["train"] = split.train;
    j["val"] = split.val;
    j["test"] = split.test;
    std::ofstream out(json_path, std::ios::trunc);
    if (!out) throw IoError("cannot open for writing: " + json_path.string());
    out << j.dump(2) << "\n";
}

void save_series(const MVMSeries& series, const std::filesystem::path& dir) {
    validate_series(series);
    std::filesystem::create_directories(dir);

    const int t = series.frames();
    const Index h = series.rows(), w = series.cols();
    const size_t plane = static_cast<size_t>(h) * static_cast<size_t>(w);

    std::vector<float> mag_buf, phase_buf, mask_buf;
    mag_buf.reserve(static_cast<size_t>(t) * plane);
    phase_buf.reserve(static_cast<size_t>(t) * 3 * plane);
    mask_buf.reserve(static_cast<size_t>(t) * plane);
    for (int i = 0; i < t; ++i) {
        const auto idx = static_cast<size_t>(i);
        mag_buf.insert(mag_buf.end(), series.magnitude[idx].data(), series.magnitude[idx].data() + plane);
        for (int d = 0; d < 3; ++d) {
            const ImageF& ph = series.phase[idx][static_cast<size_t>(d)];
            phase_buf.insert(phase_buf.end(), ph.data(), ph.data() + plane);
        }
        mask_buf.insert(mask_buf.end(), series.mask[idx].data(), series.mask[idx].data() + plane);
    }

    json manifest;
    manifest["version"] = "1";
    manifest["subject_id"] = series.subject_id;
    manifest["slice_id"] = series.slice_id;
    manifest["frames"] = t;
    manifest["height"] = h;
    manifest["width"] = w;
    manifest["pixel_spacing_mm"] = {series.pixel_spacing_mm.x(), series.pixel_spacing_mm.y()};
    manifest["venc_mm_per_s"] = {series.venc_mm_per_s.x(), series.venc_mm_per_s.y(),
                                 series.venc_mm_per_s.z()};
    auto describe = [&](const std::vector<float>& buf, std::vector<Index> shape, const char* file) {
        json a;
        a["file"] = file;
        a["shape"] = shape;
        a["sha256"] = sha256_hex(buf.data(), buf.size() * sizeof(float));
        return a;
    };
    manifest["arrays"]["magnitude"] = describe(mag_buf, {t, h, w}, "magnitude.f32");
    manifest["arrays"]["phase"] = describe(phase_buf, {t, 3, h, w}, "phase.f32");
    manifest["arrays"]["mask"] = describe(mask_buf, {t, h, w}, "mask.f32");

    write_f32_file(dir / "magnitude.f32", mag_buf);
    write_f32_file(dir / "phase.f32", phase_buf);
    write_f32_file(dir / "mask.f32", mask_buf);
    std::ofstream out(dir / "manifest.json", std::ios::trunc);
    if (!out) throw IoError("cannot open for writing: " + (dir / "manifest.json").string());
    out << manifest.dump(2) << "\n";
}

MVMSeries load_series(const std::filesystem::path& dir) {
    std::ifstream in(dir / "manifest.json");
    if (!in) throw IoError("missing file: " + (dir / "manifest.json").string());
    json manifest = json::parse(in);

    const std::string version = manifest.at("version").get<std::string>();
    if (version != "1") throw IoError("unsupported archive version \"" + version + "\" in " + dir.string());

    MVMSeries series;
    series.subject_id = manifest.at("subject_id").get<std::string>();
    series.slice_id = manifest.at("slice_id").get<std::string>();
    const int t = manifest.at("frames").get<int>();
    const Index h = manifest.at("height").get<Index>();
    const Index w = manifest.at("width").get<Index>();
    auto spacing = manifest.at("pixel_spacing_mm").get<std::vector<float>>();
    auto venc = manifest.at("venc_mm_per_s").get<std::vector<float>>();
    if (spacing.size() != 2 || venc.size() != 3)
        throw IoError("malformed manifest metadata in " + dir.string());
    series.pixel_spacing_mm = {spacing[0], spacing[1]};
    series.venc_mm_per_s = {venc[0], venc[1], venc[2]};
    if (t < 1 || h < 1 || w < 1) throw IoError("malformed manifest dims in " + dir.string());
    const size_t plane = static_cast<size_t>(h) * static_cast<size_t>(w);

    auto load_array = [&](const char* name, size_t count) {
        const json& a = manifest.at("arrays").at(name);
        auto data = read_f32_file(dir / a.at("file").get<std::string>(), count);
        const std::string expected = a.at("sha256").get<std::string>();
        const std::string actual = sha256_hex(data.data(), data.size() * sizeof(float));
        if (expected != actual)
            throw IoError(std::string("checksum mismatch for ") + name + " in " + dir.string());
        return data;
    };
    auto mag_buf = load_array("magnitude", static_cast<size_t>(t) * plane);
    auto phase_buf = load_array("phase", static_cast<size_t>(t) * 3 * plane);
    auto mask_buf = load_array("mask", static_cast<size_t>(t) * plane);

    auto take_plane = [&](const std::vector<float>& buf, size_t offset) {
        ImageF img(h, w);
        std::memcpy(img.data(), buf.data() + offset, plane * sizeof(float));
        return img;
    };
    series.magnitude.reserve(static_cast<size_t>(t));
    series.phase.reserve(static_cast<size_t>(t));
    series.mask.reserve(static_cast<size_t>(t));
    for (int i = 0; i < t; ++i) {
        const auto idx = static_cast<size_t>(i);
        series.magnitude.push_back(take_plane(mag_buf, idx * plane));
        series.phase.push_back({take_plane(phase_buf, (idx * 3 + 0) * plane),
                                take_plane(phase_buf, (idx * 3 + 1) * plane),
                                take_plane(phase_buf, (idx * 3 + 2) * plane)});
        series.mask.push_back(take_plane(mask_buf, idx * plane));
    }
    validate_series(series);
    return series;
}

}  // namespace mvm
