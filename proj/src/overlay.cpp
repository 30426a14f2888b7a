#include "ptrack/overlay.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>

namespace ptrack {

namespace {

struct Color {
    unsigned char r, g, b;
};

constexpr Color kPalette[] = {
    {230, 80, 80},  {80, 200, 120}, {90, 140, 255}, {240, 200, 70},
    {200, 100, 220}, {80, 210, 210}, {250, 140, 60}, {160, 160, 160},
};

constexpr Color kUnlabeled{200, 200, 200};

// Skeleton edges for the default 15-joint layout.
constexpr int kEdges[][2] = {
    {0, 1},  {1, 2},  {2, 3},   {3, 4},   {4, 5},  {2, 8},  {3, 9},
    {8, 9},  {8, 7},  {7, 6},   {9, 10},  {10, 11}, {8, 12}, {9, 12},
    {12, 13}, {12, 14},
};

// 3x5 bitmap digits, row-major bits.
constexpr unsigned short kDigits[10] = {
    0b111101101101111,  // 0
    0b010110010010111,  // 1
    0b111001111100111,  // 2
    0b111001111001111,  // 3
    0b101101111001001,  // 4
    0b111100111001111,  // 5
    0b111100111101111,  // 6
    0b111001001001001,  // 7
    0b111101111101111,  // 8
    0b111101111001111,  // 9
};

class Canvas {
  public:
    Canvas(int width, int height) : width_(width), height_(height) {
        pixels_.assign(static_cast<std::size_t>(width) * height * 3, 24);
    }

    void set(int x, int y, Color c) {
        if (x < 0 || y < 0 || x >= width_ || y >= height_) return;
        const std::size_t i = (static_cast<std::size_t>(y) * width_ + x) * 3;
        pixels_[i] = c.r;
        pixels_[i + 1] = c.g;
        pixels_[i + 2] = c.b;
    }

    void dot(int x, int y, Color c) {
        for (int dy = -1; dy <= 1; ++dy) {
            for (int dx = -1; dx <= 1; ++dx) set(x + dx, y + dy, c);
        }
    }

    void line(int x0, int y0, int x1, int y1, Color c) {
        const int dx = std::abs(x1 - x0), dy = -std::abs(y1 - y0);
        const int sx = x0 < x1 ? 1 : -1, sy = y0 < y1 ? 1 : -1;
        int err = dx + dy;
        while (true) {
            set(x0, y0, c);
            if (x0 == x1 && y0 == y1) break;
            const int e2 = 2 * err;
            if (e2 >= dy) {
                err += dy;
                x0 += sx;
            }
            if (e2 <= dx) {
                err += dx;
                y0 += sy;
            }
        }
    }

    void digit(int x, int y, int d, Color c, int px = 2) {
        const unsigned short bits = kDigits[d];
        for (int row = 0; row < 5; ++row) {
            for (int col = 0; col < 3; ++col) {
                if (bits & (1 << (14 - (row * 3 + col)))) {
                    for (int yy = 0; yy < px; ++yy) {
                        for (int xx = 0; xx < px; ++xx) {
                            set(x + col * px + xx, y + row * px + yy, c);
                        }
                    }
                }
            }
        }
    }

    void label(int x, int y, std::int64_t value, Color c) {
        char buf[24];
        std::snprintf(buf, sizeof(buf), "%lld", static_cast<long long>(value));
        int cx = x;
        for (const char* p = buf; *p; ++p) {
            if (*p >= '0' && *p <= '9') {
                digit(cx, y, *p - '0', c);
                cx += 8;
            }
        }
    }

    void write_ppm(const std::filesystem::path& path) const {
        std::ofstream out(path, std::ios::binary);
        if (!out) throw ParseError(path.string() + ": cannot open overlay for writing");
        out << "P6\n" << width_ << " " << height_ << "\n255\n";
        out.write(reinterpret_cast<const char*>(pixels_.data()),
                  static_cast<std::streamsize>(pixels_.size()));
        if (!out) throw ParseError(path.string() + ": write failed");
    }

  private:
    int width_, height_;
    std::vector<unsigned char> pixels_;
};

}  // namespace

void write_overlays(const AnnotationDocument& doc, const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);
    std::map<std::int64_t, std::vector<const Annotation*>> by_frame;
    for (const auto& ann : doc.annotations) by_frame[ann.frame_id].push_back(&ann);

    const int k = doc.joint_count();
    for (const auto& image : doc.images) {
        Canvas canvas(image.width, image.height);
        const auto it = by_frame.find(image.frame_id);
        if (it != by_frame.end()) {
            for (const Annotation* ann : it->second) {
                const Color color = ann->track_id.has_value()
                                        ? kPalette[static_cast<std::size_t>(
                                              ((*ann->track_id % 8) + 8) % 8)]
                                        : kUnlabeled;
                auto joint = [&](int j) -> std::optional<std::array<int, 2>> {
                    if (j >= k || !(ann->keypoints[3 * j + 2] > 0.0)) return std::nullopt;
                    return std::array<int, 2>{
                        static_cast<int>(std::lround(ann->keypoints[3 * j])),
                        static_cast<int>(std::lround(ann->keypoints[3 * j + 1]))};
                };
                if (k == 15) {
                    for (const auto& edge : kEdges) {
                        const auto a = joint(edge[0]);
                        const auto b = joint(edge[1]);
                        if (a && b) canvas.line((*a)[0], (*a)[1], (*b)[0], (*b)[1], color);
                    }
                }
                for (int j = 0; j < k; ++j) {
                    if (const auto p = joint(j)) canvas.dot((*p)[0], (*p)[1], color);
                }
                if (ann->track_id.has_value()) {
                    canvas.label(static_cast<int>(std::lround(ann->bbox[0])),
                                 static_cast<int>(std::lround(ann->bbox[1])) - 12,
                                 *ann->track_id, color);
                }
            }
        }
        char name[32];
        std::snprintf(name, sizeof(name), "frame_%06lld.ppm",
                      static_cast<long long>(image.frame_id));
        canvas.write_ppm(out_dir / name);
    }
}

}  // namespace ptrack
