#include "ptrack/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "ptrack/io.hpp"

namespace ptrack {

namespace {

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

double parse_number(const std::string& value, const std::string& ctx) {
    std::size_t pos = 0;
    double v = 0.0;
    try {
        v = std::stod(value, &pos);
    } catch (const std::exception&) {
        throw ParseError(ctx + "expected a number, got '" + value + "'");
    }
    if (pos != value.size() || !std::isfinite(v)) {
        throw ParseError(ctx + "expected a number, got '" + value + "'");
    }
    return v;
}

std::int64_t parse_integer(const std::string& value, const std::string& ctx) {
    std::size_t pos = 0;
    long long v = 0;
    try {
        v = std::stoll(value, &pos);
    } catch (const std::exception&) {
        throw ParseError(ctx + "expected an integer, got '" + value + "'");
    }
    if (pos != value.size()) {
        throw ParseError(ctx + "expected an integer, got '" + value + "'");
    }
    return v;
}

bool parse_bool(const std::string& value, const std::string& ctx) {
    if (value == "true" || value == "1") return true;
    if (value == "false" || value == "0") return false;
    throw ParseError(ctx + "expected true/false, got '" + value + "'");
}

double parse_unit(const std::string& value, const std::string& ctx) {
    const double v = parse_number(value, ctx);
    if (!(v >= 0.0 && v <= 1.0)) {
        throw ParseError(ctx + "value must lie in [0,1], got '" + value + "'");
    }
    return v;
}

}  // namespace

void RunConfig::validate() const {
    tracker.validate();
    if (!(tau_factor > 0.0)) {
        throw ParseError("config: tau_factor must be > 0");
    }
    if (feature_dim < 1) {
        throw ParseError("config: feature_dim must be >= 1");
    }
    if (flow_provider != "identity" && flow_provider != "constant_velocity" &&
        flow_provider != "file") {
        throw ParseError("config: flow_provider must be identity, constant_velocity or file");
    }
}

RunConfig parse_run_config(const std::string& text, const std::string& origin) {
    RunConfig cfg;
    bool revision_conf_overridden = false;
    bool revision_nms_overridden = false;
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const std::string ctx = origin + ", line " + std::to_string(line_no) + ": ";
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ParseError(ctx + "expected 'key = value'");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty() || value.empty()) {
            throw ParseError(ctx + "expected 'key = value'");
        }

        if (key == "conf_threshold") {
            cfg.tracker.conf_threshold = parse_unit(value, ctx);
        } else if (key == "match_threshold") {
            cfg.tracker.match_threshold = parse_unit(value, ctx);
        } else if (key == "nms_oks_threshold") {
            cfg.tracker.nms_oks_threshold = parse_unit(value, ctx);
        } else if (key == "revival_margin") {
            const double v = parse_number(value, ctx);
            if (v < 0.0) throw ParseError(ctx + "revival_margin must be >= 0");
            cfg.tracker.revival_margin = v;
        } else if (key == "history_depth") {
            const auto v = parse_integer(value, ctx);
            if (v < 2) throw ParseError(ctx + "history_depth must be >= 2");
            cfg.tracker.history_depth = static_cast<int>(v);
        } else if (key == "enable_revision") {
            cfg.tracker.enable_revision = parse_bool(value, ctx);
        } else if (key == "enable_reid") {
            cfg.tracker.enable_reid = parse_bool(value, ctx);
        } else if (key == "revision_score_threshold") {
            cfg.tracker.revision.score_threshold = parse_unit(value, ctx);
        } else if (key == "revision_overlap_threshold") {
            cfg.tracker.revision.overlap_threshold = parse_unit(value, ctx);
        } else if (key == "revision_iou_gate") {
            cfg.tracker.revision.iou_gate = parse_unit(value, ctx);
        } else if (key == "revision_conf_threshold") {
            cfg.tracker.revision.conf_threshold = parse_unit(value, ctx);
            revision_conf_overridden = true;
        } else if (key == "reid_distance_threshold") {
            const double v = parse_number(value, ctx);
            if (!(v > 0.0)) throw ParseError(ctx + "reid_distance_threshold must be > 0");
            cfg.tracker.reid.distance_threshold = v;
        } else if (key == "reid_max_age") {
            const auto v = parse_integer(value, ctx);
            if (v < 1) throw ParseError(ctx + "reid_max_age must be >= 1");
            cfg.tracker.reid.max_age = v;
        } else if (key == "tau_factor") {
            const double v = parse_number(value, ctx);
            if (!(v > 0.0)) throw ParseError(ctx + "tau_factor must be > 0");
            cfg.tau_factor = v;
        } else if (key == "feature_dim") {
            const auto v = parse_integer(value, ctx);
            if (v < 1) throw ParseError(ctx + "feature_dim must be >= 1");
            cfg.feature_dim = static_cast<int>(v);
        } else if (key == "flow_provider") {
            cfg.flow_provider = value;
        } else if (key == "ignore_availability") {
            cfg.ignore_availability = parse_bool(value, ctx);
        } else {
            throw ParseError(ctx + "unknown key '" + key + "'");
        }
    }
    // The per-keypoint gate in the overlap metric and the NMS threshold
    // follow the run-wide values unless explicitly overridden.
    if (!revision_conf_overridden) {
        cfg.tracker.revision.conf_threshold = cfg.tracker.conf_threshold;
    }
    if (!revision_nms_overridden) {
        cfg.tracker.revision.nms_oks_threshold = cfg.tracker.nms_oks_threshold;
    }
    cfg.validate();
    return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError(path.string() + ": cannot open config file");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_run_config(buf.str(), path.string());
}

}  // namespace ptrack
