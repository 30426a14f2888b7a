#include "ptrack/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace ptrack {

namespace {

using nlohmann::json;

std::string file_context(const std::filesystem::path& path) { return path.string() + ": "; }

const json& require_field(const json& obj, const char* key, const std::string& ctx) {
    const auto it = obj.find(key);
    if (it == obj.end()) {
        throw ParseError(ctx + "missing field '" + key + "'");
    }
    return *it;
}

std::int64_t require_int(const json& obj, const char* key, const std::string& ctx) {
    const json& v = require_field(obj, key, ctx);
    if (!v.is_number_integer()) {
        throw ParseError(ctx + "field '" + key + "' must be an integer");
    }
    return v.get<std::int64_t>();
}

double require_number(const json& obj, const char* key, const std::string& ctx) {
    const json& v = require_field(obj, key, ctx);
    if (!v.is_number()) {
        throw ParseError(ctx + "field '" + key + "' must be a number");
    }
    return v.get<double>();
}

std::vector<double> require_number_array(const json& obj, const char* key,
                                         const std::string& ctx) {
    const json& v = require_field(obj, key, ctx);
    if (!v.is_array()) {
        throw ParseError(ctx + "field '" + key + "' must be an array");
    }
    std::vector<double> out;
    out.reserve(v.size());
    for (const auto& e : v) {
        if (!e.is_number()) {
            throw ParseError(ctx + "field '" + key + "' must hold numbers only");
        }
        out.push_back(e.get<double>());
    }
    return out;
}

void check_probability(double v, const char* what, const std::string& ctx) {
    if (!(v >= 0.0 && v <= 1.0)) {
        throw ParseError(ctx + std::string(what) + " must lie in [0,1]");
    }
}

double head_length_fallback(const Annotation& ann, const SkeletonSpec& spec) {
    if (ann.head_length.has_value()) return *ann.head_length;
    const auto top = static_cast<std::size_t>(spec.head_pair[0]);
    const auto bottom = static_cast<std::size_t>(spec.head_pair[1]);
    const double ct = ann.keypoints[3 * top + 2];
    const double cb = ann.keypoints[3 * bottom + 2];
    if (ct > 0.0 && cb > 0.0) {
        const double d = std::hypot(ann.keypoints[3 * top] - ann.keypoints[3 * bottom],
                                    ann.keypoints[3 * top + 1] - ann.keypoints[3 * bottom + 1]);
        return std::max(d, 1.0);
    }
    return std::max(0.3 * std::sqrt(std::max(ann.bbox[2] * ann.bbox[3], 0.0)), 1.0);
}

Pose pose_from_annotation(const Annotation& ann, int joint_count, bool ignore_availability) {
    Pose pose = Pose::empty(joint_count);
    for (int j = 0; j < joint_count; ++j) {
        const double x = ann.keypoints[3 * j];
        const double y = ann.keypoints[3 * j + 1];
        const double c = ann.keypoints[3 * j + 2];
        if (!(c > 0.0)) continue;
        Keypoint kp;
        kp.x = x;
        kp.y = y;
        kp.p_loc = c;
        kp.p_avl = (ann.availability.has_value() && !ignore_availability)
                       ? (*ann.availability)[static_cast<std::size_t>(j)]
                       : 1.0;
        kp.p_conf = kp.p_avl * kp.p_loc;
        pose.keypoints[static_cast<std::size_t>(j)] = kp;
    }
    pose.bbox = BBox{ann.bbox[0], ann.bbox[1], ann.bbox[0] + ann.bbox[2],
                     ann.bbox[1] + ann.bbox[3]};
    pose.recompute_score();
    return pose;
}

// Images sorted by frame id; duplicates rejected.
std::vector<ImageInfo> sorted_images(const AnnotationDocument& doc) {
    std::vector<ImageInfo> images = doc.images;
    std::sort(images.begin(), images.end(),
              [](const ImageInfo& a, const ImageInfo& b) { return a.frame_id < b.frame_id; });
    for (std::size_t i = 1; i < images.size(); ++i) {
        if (images[i].frame_id == images[i - 1].frame_id) {
            throw ParseError("document: duplicate image frame id " +
                             std::to_string(images[i].frame_id));
        }
    }
    return images;
}

void ensure_finite(double v, const char* what) {
    if (!std::isfinite(v)) {
        throw std::invalid_argument(std::string("save_annotations: non-finite ") + what);
    }
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

SkeletonSpec AnnotationDocument::skeleton() const {
    if (!category.has_value()) return SkeletonSpec::posetrack15();
    SkeletonSpec spec;
    spec.joint_names = category->joint_names;
    spec.falloff = category->falloff;
    spec.head_pair = category->head_pair;
    spec.validate();
    return spec;
}

int AnnotationDocument::joint_count() const {
    if (category.has_value()) return static_cast<int>(category->joint_names.size());
    if (!annotations.empty()) return static_cast<int>(annotations.front().keypoints.size() / 3);
    return 15;
}

AnnotationDocument load_annotations(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError(file_context(path) + "cannot open file");
    json root;
    try {
        root = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ParseError(file_context(path) + e.what());
    }
    const std::string ctx = file_context(path);
    if (!root.is_object()) throw ParseError(ctx + "root must be an object");

    AnnotationDocument doc;
    const json& images = require_field(root, "images", ctx);
    if (!images.is_array()) throw ParseError(ctx + "'images' must be an array");
    for (std::size_t i = 0; i < images.size(); ++i) {
        const std::string ictx = ctx + "image #" + std::to_string(i) + ": ";
        const json& im = images[i];
        if (!im.is_object()) throw ParseError(ictx + "must be an object");
        ImageInfo info;
        info.frame_id = require_int(im, "frame_id", ictx);
        const json& name = require_field(im, "file_name", ictx);
        if (!name.is_string()) throw ParseError(ictx + "'file_name' must be a string");
        info.file_name = name.get<std::string>();
        info.width = static_cast<int>(require_int(im, "width", ictx));
        info.height = static_cast<int>(require_int(im, "height", ictx));
        if (info.width < 1 || info.height < 1) {
            throw ParseError(ictx + "image size must be positive");
        }
        doc.images.push_back(std::move(info));
    }

    if (root.contains("categories")) {
        const json& cats = root["categories"];
        if (!cats.is_array() || cats.empty()) {
            throw ParseError(ctx + "'categories' must be a non-empty array");
        }
        const std::string cctx = ctx + "category: ";
        const json& cat = cats[0];
        CategoryInfo info;
        const json& names = require_field(cat, "keypoints", cctx);
        if (!names.is_array() || names.empty()) {
            throw ParseError(cctx + "'keypoints' must be a non-empty array");
        }
        for (const auto& n : names) {
            if (!n.is_string()) throw ParseError(cctx + "'keypoints' must hold strings");
            info.joint_names.push_back(n.get<std::string>());
        }
        info.falloff = require_number_array(cat, "falloff", cctx);
        const auto pair = require_number_array(cat, "head_pair", cctx);
        if (pair.size() != 2) throw ParseError(cctx + "'head_pair' must hold two indices");
        info.head_pair = {static_cast<int>(pair[0]), static_cast<int>(pair[1])};
        doc.category = std::move(info);
        doc.skeleton();  // validates
    }

    std::vector<std::int64_t> frame_ids;
    for (const auto& im : doc.images) frame_ids.push_back(im.frame_id);
    std::sort(frame_ids.begin(), frame_ids.end());

    int joint_count = doc.category.has_value()
                          ? static_cast<int>(doc.category->joint_names.size())
                          : -1;
    if (root.contains("annotations")) {
        const json& anns = root["annotations"];
        if (!anns.is_array()) throw ParseError(ctx + "'annotations' must be an array");
        for (std::size_t i = 0; i < anns.size(); ++i) {
            const std::string actx = ctx + "annotation #" + std::to_string(i) + ": ";
            const json& a = anns[i];
            if (!a.is_object()) throw ParseError(actx + "must be an object");
            Annotation ann;
            ann.frame_id = require_int(a, "frame_id", actx);
            if (!std::binary_search(frame_ids.begin(), frame_ids.end(), ann.frame_id)) {
                throw ParseError(actx + "frame_id " + std::to_string(ann.frame_id) +
                                 " has no matching image");
            }
            if (a.contains("track_id")) {
                if (!a["track_id"].is_number_integer()) {
                    throw ParseError(actx + "'track_id' must be an integer");
                }
                ann.track_id = a["track_id"].get<std::int64_t>();
            }
            const auto box = require_number_array(a, "bbox", actx);
            if (box.size() != 4) throw ParseError(actx + "'bbox' must hold [x, y, w, h]");
            if (box[2] < 0.0 || box[3] < 0.0) {
                throw ParseError(actx + "'bbox' width and height must be >= 0");
            }
            ann.bbox = {box[0], box[1], box[2], box[3]};
            ann.keypoints = require_number_array(a, "keypoints", actx);
            if (ann.keypoints.size() % 3 != 0 || ann.keypoints.empty()) {
                throw ParseError(actx + "'keypoints' length must be a positive multiple of 3");
            }
            const int k = static_cast<int>(ann.keypoints.size() / 3);
            if (joint_count < 0) joint_count = k;
            if (k != joint_count) {
                throw ParseError(actx + "'keypoints' length " +
                                 std::to_string(ann.keypoints.size()) + " does not match " +
                                 std::to_string(3 * joint_count) + " expected values");
            }
            for (int j = 0; j < k; ++j) {
                check_probability(ann.keypoints[3 * j + 2],
                                  ("keypoint " + std::to_string(j) + " confidence").c_str(), actx);
            }
            if (a.contains("availability")) {
                auto av = require_number_array(a, "availability", actx);
                if (static_cast<int>(av.size()) != joint_count) {
                    throw ParseError(actx + "'availability' must hold one value per joint");
                }
                for (double v : av) check_probability(v, "availability", actx);
                ann.availability = std::move(av);
            }
            ann.score = require_number(a, "score", actx);
            if (a.contains("head_length")) {
                const json& hl = a["head_length"];
                if (!hl.is_number()) throw ParseError(actx + "'head_length' must be a number");
                ann.head_length = hl.get<double>();
                if (!(*ann.head_length > 0.0)) {
                    throw ParseError(actx + "'head_length' must be > 0");
                }
            }
            doc.annotations.push_back(std::move(ann));
        }
    }
    return doc;
}

void save_annotations(const AnnotationDocument& doc, const std::filesystem::path& path) {
    json root;
    json images = json::array();
    for (const auto& im : doc.images) {
        images.push_back({{"frame_id", im.frame_id},
                          {"file_name", im.file_name},
                          {"width", im.width},
                          {"height", im.height}});
    }
    root["images"] = std::move(images);

    json anns = json::array();
    for (const auto& ann : doc.annotations) {
        for (double v : ann.keypoints) ensure_finite(v, "keypoint value");
        for (double v : ann.bbox) ensure_finite(v, "bbox value");
        ensure_finite(ann.score, "score");
        json a = {{"frame_id", ann.frame_id},
                  {"bbox", ann.bbox},
                  {"keypoints", ann.keypoints},
                  {"score", ann.score}};
        if (ann.track_id.has_value()) a["track_id"] = *ann.track_id;
        if (ann.availability.has_value()) {
            for (double v : *ann.availability) ensure_finite(v, "availability value");
            a["availability"] = *ann.availability;
        }
        if (ann.head_length.has_value()) {
            ensure_finite(*ann.head_length, "head_length");
            a["head_length"] = *ann.head_length;
        }
        anns.push_back(std::move(a));
    }
    root["annotations"] = std::move(anns);

    if (doc.category.has_value()) {
        for (double v : doc.category->falloff) ensure_finite(v, "falloff value");
        root["categories"] = json::array({{{"name", "person"},
                                           {"keypoints", doc.category->joint_names},
                                           {"falloff", doc.category->falloff},
                                           {"head_pair", doc.category->head_pair}}});
    }

    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError(file_context(path) + "cannot open file for writing");
    out << root.dump(2) << "\n";
    if (!out) throw ParseError(file_context(path) + "write failed");
}

std::vector<FrameObservations> observations_from_document(const AnnotationDocument& doc,
                                                          bool ignore_availability) {
    const auto images = sorted_images(doc);
    const int k = doc.joint_count();
    std::map<std::int64_t, std::size_t> frame_index;
    std::vector<FrameObservations> out(images.size());
    for (std::size_t i = 0; i < images.size(); ++i) {
        out[i].frame = images[i].frame_id;
        frame_index[images[i].frame_id] = i;
    }
    for (const auto& ann : doc.annotations) {
        auto& obs = out[frame_index.at(ann.frame_id)];
        obs.detections.push_back(pose_from_annotation(ann, k, ignore_availability));
        obs.features.push_back(std::nullopt);
    }
    return out;
}

GroundTruthSequence ground_truth_from_document(const AnnotationDocument& doc) {
    const auto images = sorted_images(doc);
    const int k = doc.joint_count();
    const SkeletonSpec spec = doc.skeleton();
    std::map<std::int64_t, std::size_t> frame_index;
    GroundTruthSequence gt(images.size());
    for (std::size_t i = 0; i < images.size(); ++i) {
        gt[i].frame = images[i].frame_id;
        frame_index[images[i].frame_id] = i;
    }
    for (std::size_t i = 0; i < doc.annotations.size(); ++i) {
        const auto& ann = doc.annotations[i];
        if (!ann.track_id.has_value()) {
            throw ParseError("ground truth annotation #" + std::to_string(i) +
                             " is missing a track id");
        }
        GtInstance inst;
        inst.track_id = *ann.track_id;
        inst.pose = Pose::empty(k);
        for (int j = 0; j < k; ++j) {
            if (ann.keypoints[3 * j + 2] > 0.0) {
                inst.pose.keypoints[static_cast<std::size_t>(j)] =
                    Keypoint{ann.keypoints[3 * j], ann.keypoints[3 * j + 1], 1.0, 1.0, 1.0};
            }
        }
        inst.pose.bbox = BBox{ann.bbox[0], ann.bbox[1], ann.bbox[0] + ann.bbox[2],
                              ann.bbox[1] + ann.bbox[3]};
        inst.pose.recompute_score();
        inst.head_length = head_length_fallback(ann, spec);
        gt[frame_index.at(ann.frame_id)].instances.push_back(std::move(inst));
    }
    return gt;
}

std::vector<TrackedFrame> predictions_from_document(const AnnotationDocument& doc) {
    const auto images = sorted_images(doc);
    const int k = doc.joint_count();
    std::map<std::int64_t, std::size_t> frame_index;
    std::vector<TrackedFrame> out(images.size());
    for (std::size_t i = 0; i < images.size(); ++i) {
        out[i].frame = images[i].frame_id;
        frame_index[images[i].frame_id] = i;
    }
    for (std::size_t i = 0; i < doc.annotations.size(); ++i) {
        const auto& ann = doc.annotations[i];
        if (!ann.track_id.has_value()) {
            throw ParseError("prediction annotation #" + std::to_string(i) +
                             " is missing a track id");
        }
        Pose pose = pose_from_annotation(ann, k, false);
        pose.score = ann.score;
        out[frame_index.at(ann.frame_id)].poses.push_back(TrackedPose{*ann.track_id, pose});
    }
    return out;
}

namespace {

Annotation annotation_from_pose(const Pose& pose, std::int64_t frame, int joint_count,
                                bool with_availability) {
    Annotation ann;
    ann.frame_id = frame;
    ann.keypoints.assign(static_cast<std::size_t>(3 * joint_count), 0.0);
    if (with_availability) {
        ann.availability.emplace(static_cast<std::size_t>(joint_count), 0.0);
    }
    for (int j = 0; j < joint_count; ++j) {
        const auto& kp = pose.keypoints[static_cast<std::size_t>(j)];
        if (!kp.has_value()) continue;
        ann.keypoints[3 * j] = kp->x;
        ann.keypoints[3 * j + 1] = kp->y;
        ann.keypoints[3 * j + 2] = kp->p_loc;
        if (with_availability) (*ann.availability)[static_cast<std::size_t>(j)] = kp->p_avl;
    }
    ann.bbox = {pose.bbox.x_min, pose.bbox.y_min, pose.bbox.width(), pose.bbox.height()};
    ann.score = pose.score;
    return ann;
}

CategoryInfo category_from_spec(const SkeletonSpec& spec) {
    return CategoryInfo{spec.joint_names, spec.falloff, spec.head_pair};
}

}  // namespace

AnnotationDocument document_from_tracks(const std::vector<TrackedFrame>& frames,
                                        const std::vector<ImageInfo>& images,
                                        const SkeletonSpec& spec) {
    AnnotationDocument doc;
    doc.images = images;
    doc.category = category_from_spec(spec);
    for (const auto& frame : frames) {
        for (const auto& tp : frame.poses) {
            Annotation ann = annotation_from_pose(tp.pose, frame.frame, spec.joint_count(), true);
            ann.track_id = tp.track_id;
            doc.annotations.push_back(std::move(ann));
        }
    }
    return doc;
}

AnnotationDocument document_from_ground_truth(const GroundTruthSequence& gt,
                                              const std::vector<ImageInfo>& images,
                                              const SkeletonSpec& spec) {
    AnnotationDocument doc;
    doc.images = images;
    doc.category = category_from_spec(spec);
    for (const auto& frame : gt) {
        for (const auto& inst : frame.instances) {
            Annotation ann =
                annotation_from_pose(inst.pose, frame.frame, spec.joint_count(), false);
            ann.track_id = inst.track_id;
            ann.head_length = inst.head_length;
            doc.annotations.push_back(std::move(ann));
        }
    }
    return doc;
}

AnnotationDocument document_from_observations(const std::vector<FrameObservations>& obs,
                                              const std::vector<ImageInfo>& images,
                                              const SkeletonSpec& spec) {
    AnnotationDocument doc;
    doc.images = images;
    doc.category = category_from_spec(spec);
    for (const auto& frame : obs) {
        for (const auto& det : frame.detections) {
            doc.annotations.push_back(
                annotation_from_pose(det, frame.frame, spec.joint_count(), true));
        }
    }
    return doc;
}

namespace {

constexpr char kFlowMagic[4] = {'P', 'E', 'H', '1'};

void put_u32(std::string& buf, std::uint32_t v) {
    buf.push_back(static_cast<char>(v & 0xff));
    buf.push_back(static_cast<char>((v >> 8) & 0xff));
    buf.push_back(static_cast<char>((v >> 16) & 0xff));
    buf.push_back(static_cast<char>((v >> 24) & 0xff));
}

std::uint32_t get_u32(const unsigned char* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

void put_f32(std::string& buf, float v) {
    std::uint32_t bits;
    std::memcpy(&bits, &v, 4);
    put_u32(buf, bits);
}

float get_f32(const unsigned char* p) {
    const std::uint32_t bits = get_u32(p);
    float v;
    std::memcpy(&v, &bits, 4);
    return v;
}

}  // namespace

FlowField read_flow(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError(file_context(path) + "cannot open flow file");
    std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (data.size() < 12 || std::memcmp(data.data(), kFlowMagic, 4) != 0) {
        throw ParseError(file_context(path) + "bad flow header (expected magic PEH1)");
    }
    const auto* bytes = reinterpret_cast<const unsigned char*>(data.data());
    const std::uint32_t w = get_u32(bytes + 4);
    const std::uint32_t h = get_u32(bytes + 8);
    const std::size_t expected = 12 + static_cast<std::size_t>(w) * h * 8;
    if (w == 0 || h == 0 || data.size() != expected) {
        throw ParseError(file_context(path) + "flow payload size does not match header");
    }
    FlowField flow = FlowField::zeros(static_cast<int>(w), static_cast<int>(h));
    const unsigned char* p = bytes + 12;
    for (auto& v : flow.vectors) {
        v[0] = get_f32(p);
        v[1] = get_f32(p + 4);
        if (!std::isfinite(v[0]) || !std::isfinite(v[1])) {
            throw ParseError(file_context(path) + "flow holds non-finite components");
        }
        p += 8;
    }
    return flow;
}

void write_flow(const FlowField& flow, const std::filesystem::path& path) {
    std::string buf;
    buf.reserve(12 + flow.vectors.size() * 8);
    buf.append(kFlowMagic, 4);
    put_u32(buf, static_cast<std::uint32_t>(flow.width));
    put_u32(buf, static_cast<std::uint32_t>(flow.height));
    for (const auto& v : flow.vectors) {
        put_f32(buf, v[0]);
        put_f32(buf, v[1]);
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError(file_context(path) + "cannot open flow file for writing");
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (!out) throw ParseError(file_context(path) + "write failed");
}

std::string flow_file_name(std::int64_t frame) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "flow_%06lld.bin", static_cast<long long>(frame));
    return buf;
}

FeatureTable load_features(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError(file_context(path) + "cannot open feature file");
    FeatureTable table;
    std::string line;
    std::size_t line_no = 0;
    std::size_t dim = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const std::string ctx = file_context(path) + "line " + std::to_string(line_no) + ": ";
        std::vector<std::string> tokens;
        std::stringstream ss(line);
        std::string tok;
        while (std::getline(ss, tok, ',')) tokens.push_back(tok);
        if (tokens.size() < 3) {
            throw ParseError(ctx + "expected 'frame, detection, values...'");
        }
        auto parse_int = [&](const std::string& s, const char* what) {
            std::size_t pos = 0;
            long long v = 0;
            try {
                v = std::stoll(s, &pos);
            } catch (const std::exception&) {
                throw ParseError(ctx + std::string(what) + " is not an integer");
            }
            if (s.find_first_not_of(" \t", pos) != std::string::npos) {
                throw ParseError(ctx + std::string(what) + " is not an integer");
            }
            return static_cast<std::int64_t>(v);
        };
        auto parse_double = [&](const std::string& s) {
            std::size_t pos = 0;
            double v = 0.0;
            try {
                v = std::stod(s, &pos);
            } catch (const std::exception&) {
                throw ParseError(ctx + "feature value is not a number");
            }
            if (s.find_first_not_of(" \t", pos) != std::string::npos) {
                throw ParseError(ctx + "feature value is not a number");
            }
            if (!std::isfinite(v)) throw ParseError(ctx + "feature value must be finite");
            return v;
        };
        const std::int64_t frame = parse_int(tokens[0], "frame id");
        const std::int64_t det = parse_int(tokens[1], "detection id");
        FeatureVector values;
        values.reserve(tokens.size() - 2);
        for (std::size_t i = 2; i < tokens.size(); ++i) values.push_back(parse_double(tokens[i]));
        if (dim == 0) dim = values.size();
        if (values.size() != dim) {
            throw ParseError(ctx + "feature dimension " + std::to_string(values.size()) +
                             " differs from earlier records (" + std::to_string(dim) + ")");
        }
        if (!table.emplace(std::make_pair(frame, det), std::move(values)).second) {
            throw ParseError(ctx + "duplicate (frame, detection) record");
        }
    }
    return table;
}

void save_features(const FeatureTable& table, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError(file_context(path) + "cannot open feature file for writing");
    for (const auto& [key, values] : table) {
        out << key.first << ", " << key.second;
        for (double v : values) out << ", " << format_double(v);
        out << "\n";
    }
    if (!out) throw ParseError(file_context(path) + "write failed");
}

void attach_features(std::vector<FrameObservations>& obs, const FeatureTable& table) {
    std::map<std::int64_t, std::size_t> frame_index;
    for (std::size_t i = 0; i < obs.size(); ++i) frame_index[obs[i].frame] = i;
    for (const auto& [key, values] : table) {
        const auto it = frame_index.find(key.first);
        if (it == frame_index.end()) {
            throw ParseError("feature record references unknown frame " +
                             std::to_string(key.first));
        }
        auto& frame = obs[it->second];
        if (key.second < 0 || static_cast<std::size_t>(key.second) >= frame.detections.size()) {
            throw ParseError("feature record references detection " + std::to_string(key.second) +
                             " missing from frame " + std::to_string(key.first));
        }
        if (frame.features.size() != frame.detections.size()) {
            frame.features.assign(frame.detections.size(), std::nullopt);
        }
        frame.features[static_cast<std::size_t>(key.second)] = values;
    }
}

std::vector<ImageInfo> bundle_images(const ScenarioBundle& bundle) {
    std::vector<ImageInfo> images;
    images.reserve(bundle.observations.size());
    for (const auto& obs : bundle.observations) {
        char name[32];
        std::snprintf(name, sizeof(name), "frame_%06lld.jpg",
                      static_cast<long long>(obs.frame));
        images.push_back(
            ImageInfo{obs.frame, name, bundle.config.width, bundle.config.height});
    }
    return images;
}

void write_bundle(const ScenarioBundle& bundle, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    const auto images = bundle_images(bundle);
    save_annotations(document_from_observations(bundle.observations, images, bundle.spec),
                     dir / "detections.json");
    save_annotations(document_from_ground_truth(bundle.gt, images, bundle.spec),
                     dir / "gt.json");

    FeatureTable table;
    for (const auto& obs : bundle.observations) {
        for (std::size_t d = 0; d < obs.features.size(); ++d) {
            if (obs.features[d].has_value()) {
                table[{obs.frame, static_cast<std::int64_t>(d)}] = *obs.features[d];
            }
        }
    }
    save_features(table, dir / "features.txt");

    const auto flow_dir = dir / "flow";
    std::filesystem::create_directories(flow_dir);
    for (const auto& obs : bundle.observations) {
        if (obs.flow.has_value()) {
            write_flow(*obs.flow, flow_dir / flow_file_name(obs.frame));
        }
    }
}

DenseFileFlowProvider::DenseFileFlowProvider(std::filesystem::path dir)
    : dir_(std::move(dir)) {}

FlowField DenseFileFlowProvider::flow_for(const std::vector<std::array<double, 2>>&,
                                          std::int64_t frame) const {
    std::lock_guard<std::mutex> lock(mutex_);
    if (cache_.has_value() && cache_->first == frame) return cache_->second;
    FlowField flow = read_flow(dir_ / flow_file_name(frame));
    cache_ = {frame, flow};
    return flow;
}

}  // namespace ptrack
