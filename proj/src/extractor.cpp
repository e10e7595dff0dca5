// Copyright 2026 The idread Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include "idread/extractor.hpp"

#include <algorithm>
#include <cmath>
#include <array>

#include "json.hpp"

namespace idread::extract {

Image rectify(const Image& photo, const Quad& quad, const layout::DocumentLayout& layout, int width) {
  if (width < 1) throw Error(ErrorKind::InvalidArgument, "rectified width must be positive");
  const int height = static_cast<int>(std::max(1L, round_even_l(width / layout.aspect_ratio)));
  return raster::warp_perspective(photo, quad, width, height);
}

std::vector<FieldLine> extract_field_lines(const Image& doc, const layout::DocumentLayout& layout, int line_height) {
  std::vector<FieldLine> out;
  for (const auto& f : layout.fields) {
    const auto box = layout::to_pixels(f.rect, doc.width(), doc.height());
    if (box.w < 1 || box.h < 1) throw Error(ErrorKind::InvalidArgument, "field " + f.name + " has an empty box");
    out.push_back({f.name, raster::resize_to_height(raster::crop(doc, box.x, box.y, box.w, box.h), line_height)});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Grayscale helpers

namespace {

struct Gray {
  int width = 0, height = 0;
  std::vector<float> v;
  float at(int x, int y) const { return v[static_cast<std::size_t>(y) * width + x]; }
};

// Source taps and weights of one output sample of a box filter.
struct Taps {
  std::vector<std::pair<int, float>> w;
};

std::vector<Taps> box_taps(double lo, double hi, int n, int limit) {
  std::vector<Taps> out(static_cast<std::size_t>(n));
  const double step = (hi - lo) / n;
  for (int i = 0; i < n; ++i) {
    const double a = lo + i * step, b = a + step;
    double total = 0;
    for (int s = std::max(0, int(std::floor(a))); s < std::min(limit, int(std::ceil(b))); ++s) {
      const double o = std::min(b, s + 1.0) - std::max(a, double(s));
      if (o > 0) out[static_cast<std::size_t>(i)].w.push_back({s, float(o)}), total += o;
    }
    for (auto& [s, w] : out[static_cast<std::size_t>(i)].w) w = static_cast<float>(w / total);
  }
  return out;
}

// Area-averaged resample of the region [x0, x1) x [y0, y1) to w x h.
Gray resample(const Gray& g, double x0, double x1, double y0, double y1, int w, int h) {
  const auto tx = box_taps(x0, x1, w, g.width), ty = box_taps(y0, y1, h, g.height);
  Gray out{w, h, std::vector<float>(static_cast<std::size_t>(w) * h, 0.0f)};
  for (int j = 0; j < h; ++j)
    for (int i = 0; i < w; ++i) {
      float acc = 0;
      for (const auto& [sy, wy] : ty[static_cast<std::size_t>(j)].w)
        for (const auto& [sx, wx] : tx[static_cast<std::size_t>(i)].w) acc += wy * wx * g.at(sx, sy);
      out.v[static_cast<std::size_t>(j) * w + i] = acc;
    }
  return out;
}

// Normalized cross-correlation of two equally sized buffers; 0 when either
// is constant.
double ncc(const std::vector<float>& a, const std::vector<float>& b) {
  const double n = static_cast<double>(a.size());
  double ma = 0, mb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) ma += a[i], mb += b[i];
  ma /= n, mb /= n;
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double da = a[i] - ma, db = b[i] - mb;
    sab += da * db, saa += da * da, sbb += db * db;
  }
  if (saa <= 0 || sbb <= 0) return 0;
  return sab / std::sqrt(saa * sbb);
}

struct Run {
  int begin, end;
};

// Maximal runs of `on`, joining runs separated by fewer than `min_gap` off
// entries.
std::vector<Run> runs(const std::vector<bool>& on, int min_gap) {
  std::vector<Run> out;
  for (int i = 0; i < static_cast<int>(on.size());) {
    if (!on[static_cast<std::size_t>(i)]) {
      ++i;
      continue;
    }
    int e = i;
    while (e < static_cast<int>(on.size()) && on[static_cast<std::size_t>(e)]) ++e;
    if (!out.empty() && i - out.back().end < min_gap) out.back().end = e;
    else out.push_back({i, e});
    i = e;
  }
  return out;
}

}  // namespace

int otsu_threshold(const std::vector<float>& gray) {
  std::array<double, 256> hist{};
  for (float g : gray) hist[static_cast<std::size_t>(std::clamp(round_even_l(g), 0L, 255L))] += 1;
  const double total = static_cast<double>(gray.size());
  double sum_all = 0;
  for (int i = 0; i < 256; ++i) sum_all += i * hist[static_cast<std::size_t>(i)];
  double w0 = 0, sum0 = 0, best = -1;
  int threshold = 0;
  for (int t = 0; t < 256; ++t) {
    w0 += hist[static_cast<std::size_t>(t)];
    sum0 += t * hist[static_cast<std::size_t>(t)];
    const double w1 = total - w0;
    if (w0 == 0 || w1 == 0) continue;
    const double m0 = sum0 / w0, m1 = (sum_all - sum0) / w1;
    const double between = w0 * w1 * (m0 - m1) * (m0 - m1);
    if (between > best) best = between, threshold = t;
  }
  return threshold;
}

// ---------------------------------------------------------------------------
// Templates

GlyphTemplates GlyphTemplates::build(int height) {
  if (height < 7) throw Error(ErrorKind::InvalidArgument, "template height must be at least 7");
  GlyphTemplates t;
  t.height = height;
  for (text::Typeface face : {text::Typeface::Sans, text::Typeface::Serif})
    for (char c : text::charset()) {
      if (c == ' ') continue;
      const auto cov = text::render_glyph(c, face, height);
      t.glyphs.push_back({c, face, cov.width, cov.alpha});
    }
  return t;
}

TemplateRecognizer::TemplateRecognizer(GlyphTemplates templates) : templates_(std::move(templates)) {}

namespace {

constexpr double kMinContrast = 40;     // gray levels between ink and paper
constexpr int kMinGapColumns = 3;       // at template height
constexpr double kSpaceGap = 0.6;       // of the cap height
constexpr double kWidthPenalty = 0.35;  // per unit of |log width ratio|

}  // namespace

Recognition TemplateRecognizer::recognize(const Image& line) const {
  if (line.empty()) throw Error(ErrorKind::InvalidArgument, "empty line image");
  const int H = templates_.height;
  Gray gray{line.width(), line.height(), raster::to_gray(line)};
  // Paper is the median level and ink the darkest percentile. Otsu alone
  // can split paper from a faint background pattern when the line holds
  // little text, so the threshold never exceeds the paper/ink midpoint.
  std::vector<float> sorted = gray.v;
  std::sort(sorted.begin(), sorted.end());
  const double paper = sorted[sorted.size() / 2];
  const double ink = sorted[sorted.size() / 500];
  if (paper - ink < kMinContrast) return {};
  const double threshold = std::min<double>(otsu_threshold(gray.v), (paper + ink) / 2);

  // Darkness in [0, 1]: 1 on ink, 0 from three quarters of the way to the
  // paper level, which drops faint background patterns.
  const double light = ink + 0.75 * (paper - ink);
  Gray dark{gray.width, gray.height, std::vector<float>(gray.v.size())};
  for (std::size_t i = 0; i < gray.v.size(); ++i)
    dark.v[i] = static_cast<float>(std::clamp((light - gray.v[i]) / (light - ink), 0.0, 1.0));

  // Text line: the row band holding the most ink.
  std::vector<bool> row_on(static_cast<std::size_t>(gray.height));
  for (int y = 0; y < gray.height; ++y) {
    int n = 0;
    for (int x = 0; x < gray.width; ++x) n += gray.at(x, y) <= threshold;
    row_on[static_cast<std::size_t>(y)] = n > 0;
  }
  Run band{0, 0};
  double band_ink = -1;
  for (const Run& r : runs(row_on, 2)) {
    double s = 0;
    for (int y = r.begin; y < r.end; ++y)
      for (int x = 0; x < gray.width; ++x) s += dark.at(x, y);
    if (s > band_ink) band_ink = s, band = r;
  }
  const int band_h = band.end - band.begin;
  if (band_h < 3) return {};

  // Normalize the band to the template height.
  const double scale = static_cast<double>(H) / band_h;
  const int W = std::max(1, static_cast<int>(round_even_l(gray.width * scale)));
  const Gray norm = resample(dark, 0, gray.width, band.begin, band.end, W, H);

  std::vector<bool> col_on(static_cast<std::size_t>(W));
  for (int x = 0; x < W; ++x) {
    float s = 0;
    for (int y = 0; y < H; ++y) s += norm.at(x, y);
    col_on[static_cast<std::size_t>(x)] = s > 1.0f;
  }
  const auto segments = runs(col_on, kMinGapColumns);

  // A line is set in one typeface; read it with each and keep the better.
  Recognition out;
  for (text::Typeface face : {text::Typeface::Sans, text::Typeface::Serif}) {
    Recognition r;
    double score_sum = 0;
    for (std::size_t i = 0; i < segments.size(); ++i) {
      const Run& seg = segments[i];
      if (i > 0 && seg.begin - segments[i - 1].end > kSpaceGap * H) r.text.push_back(' ');
      const int sw = seg.end - seg.begin;
      double best = -2;
      char best_ch = '?';
      // Segment edges may be off by a column after binarization; try each
      // edge one column either way. Crops are shared between templates of
      // the same width.
      std::map<std::array<int, 3>, Gray> crops;
      for (const auto& t : templates_.glyphs) {
        if (t.face != face) continue;
        double fit = -2;
        for (int db = -1; db <= 1; ++db)
          for (int de = -1; de <= 1; ++de) {
            const int b = std::max(0, seg.begin + db), e = std::min(W, seg.end + de);
            if (e - b < 1) continue;
            auto it = crops.find({b, e, t.width});
            if (it == crops.end()) it = crops.emplace(std::array{b, e, t.width}, resample(norm, b, e, 0, H, t.width, H)).first;
            fit = std::max(fit, ncc(it->second.v, t.ink));
          }
        const double s = fit - kWidthPenalty * std::abs(std::log(double(sw) / t.width));
        if (s > best) best = s, best_ch = t.ch;
      }
      r.text.push_back(best_ch);
      score_sum += std::clamp(best, 0.0, 1.0);
    }
    r.confidence = segments.empty() ? 0.0 : score_sum / static_cast<double>(segments.size());
    if (face == text::Typeface::Sans || r.confidence > out.confidence) out = std::move(r);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Reading

std::map<std::string, Recognition> read_fields(const Image& photo, const Quad& quad,
                                               const layout::DocumentLayout& layout, const Recognizer& recognizer,
                                               const ReaderConfig& cfg) {
  const Image doc = rectify(photo, quad, layout, cfg.rectified_width);
  const auto lines = extract_field_lines(doc, layout);
  std::vector<Recognition> results(lines.size());
  parallel_for(lines.size(), cfg.threads, [&](std::size_t i) { results[i] = recognizer.recognize(lines[i].line); });
  std::map<std::string, Recognition> out;
  for (std::size_t i = 0; i < lines.size(); ++i) out[lines[i].name] = results[i];
  return out;
}

DocumentReadout read_document_at(const Image& photo, const Quad& quad, const classifier::Model& model,
                                 const layout::Registry& layouts, const Recognizer& recognizer,
                                 const ReaderConfig& cfg) {
  const auto& shape = model.input_shape();
  if (shape[0] != shape[1] || shape[2] != 3) throw Error(ErrorKind::ShapeMismatch, "model input must be square RGB");
  const auto pred = classifier::classify(model, classifier::preprocess(photo, quad, shape[0]));
  DocumentReadout r;
  r.cls = pred.label;
  r.probabilities = pred.probabilities;
  r.quad = quad;
  r.fields = read_fields(photo, quad, layout::find_layout(layouts, pred.label), recognizer, cfg);
  return r;
}

DocumentReadout read_document(const Image& photo, const classifier::Model& model, const layout::Registry& layouts,
                              const Recognizer& recognizer, const ReaderConfig& cfg) {
  return read_document_at(photo, locator::locate(photo, cfg.locator), model, layouts, recognizer, cfg);
}

std::string readout_to_json(const DocumentReadout& r) {
  nlohmann::ordered_json j;
  j["class"] = code(r.cls);
  j["class_name"] = class_name(r.cls);
  j["probs"] = r.probabilities;
  auto quad = nlohmann::ordered_json::array();
  for (const auto& v : r.quad.v) quad.push_back({v.x, v.y});
  j["quad"] = quad;
  auto fields = nlohmann::ordered_json::object();
  for (const auto& [name, rec] : r.fields) fields[name] = {{"text", rec.text}, {"conf", rec.confidence}};
  j["fields"] = fields;
  return j.dump(2) + "\n";
}

}  // namespace idread::extract
