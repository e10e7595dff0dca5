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


#include "idread/layout.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace idread::layout {

using nlohmann::json;

int DocumentLayout::base_height() const {
  return static_cast<int>(round_even_l(static_cast<double>(base_width) / aspect_ratio));
}

const FieldSpec* DocumentLayout::field(const std::string& name) const {
  for (const auto& f : fields)
    if (f.name == name) return &f;
  return nullptr;
}

void DocumentLayout::validate() const {
  const std::string who(class_name(cls));
  if (!(aspect_ratio > 0) || base_width < 1) throw Error(ErrorKind::FormatError, who + ": bad geometry");
  auto inside = [](const NormRect& r) {
    return r.x >= 0 && r.y >= 0 && r.w >= 0 && r.h >= 0 && r.x + r.w <= 1 + 1e-12 && r.y + r.h <= 1 + 1e-12;
  };
  for (const auto& d : decorations)
    if (!inside(d.rect)) throw Error(ErrorKind::FormatError, who + ": decoration outside the document");
  for (std::size_t i = 0; i < fields.size(); ++i) {
    const auto& a = fields[i].rect;
    if (!inside(a) || a.w <= 0 || a.h <= 0) throw Error(ErrorKind::FormatError, who + ": field " + fields[i].name + " out of range");
    if (!(fields[i].cell > 0)) throw Error(ErrorKind::FormatError, who + ": field " + fields[i].name + " has no font size");
    for (std::size_t j = 0; j < i; ++j) {
      const auto& b = fields[j].rect;
      if (fields[j].name == fields[i].name) throw Error(ErrorKind::FormatError, who + ": duplicate field " + fields[i].name);
      if (a.x < b.x + b.w && b.x < a.x + a.w && a.y < b.y + b.h && b.y < a.y + a.h)
        throw Error(ErrorKind::FormatError, who + ": fields " + fields[j].name + " and " + fields[i].name + " overlap");
    }
  }
}

PixelBox to_pixels(const NormRect& r, int width, int height) {
  auto px = [](double v, int extent) { return static_cast<int>(round_even_l(v * extent)); };
  PixelBox b{px(r.x, width), px(r.y, height), px(r.w, width), px(r.h, height)};
  b.x = std::clamp(b.x, 0, width);
  b.y = std::clamp(b.y, 0, height);
  b.w = std::clamp(b.w, 0, width - b.x);
  b.h = std::clamp(b.h, 0, height - b.y);
  return b;
}

namespace {

constexpr Rgb kInk{25, 25, 40};
constexpr Rgb kPhotoBox{200, 200, 200};
constexpr Rgb kMrzBand{246, 246, 244};

// Layouts are authored in base pixels (width 1000) and stored normalized.
class Builder {
 public:
  Builder(DocumentClass cls, double aspect, text::Typeface face, Rgb paper, Rgb accent) {
    l_.cls = cls;
    l_.aspect_ratio = aspect;
    l_.typeface = face;
    l_.scheme = {paper, accent};
    h_ = l_.base_height();
  }

  NormRect norm(double x, double y, double w, double h) const {
    const double bw = l_.base_width;
    return {x / bw, y / h_, w / bw, h / h_};
  }

  // A field plus a small caption just above it.
  Builder& field(std::string name, std::string caption, double x, double y, double w, double h, double cell = 3.0) {
    l_.fields.push_back({std::move(name), norm(x, y, w, h), cell, kInk});
    if (!caption.empty()) text(std::move(caption), x + 4, y - 13, 1.3, l_.scheme.accent);
    return *this;
  }
  Builder& text(std::string s, double x, double y, double cell, Rgb color) {
    l_.decorations.push_back({DecorationKind::Text, norm(x, y, 0, 0), color, std::move(s), cell});
    return *this;
  }
  Builder& band(double x, double y, double w, double h, Rgb color) {
    l_.decorations.push_back({DecorationKind::Band, norm(x, y, w, h), color, {}, 0});
    return *this;
  }
  Builder& photo(double x, double y, double w, double h) {
    l_.decorations.push_back({DecorationKind::Photo, norm(x, y, w, h), kPhotoBox, {}, 0});
    return *this;
  }
  Builder& ellipse(double x, double y, double w, double h, Rgb color) {
    l_.decorations.push_back({DecorationKind::Ellipse, norm(x, y, w, h), color, {}, 0});
    return *this;
  }
  // Header band with a centered title.
  Builder& header(std::string title, double height, double cell) {
    band(0, 0, l_.base_width, height, l_.scheme.accent);
    const double w = text::text_width(title, l_.typeface) * cell;
    return text(std::move(title), (l_.base_width - w) / 2, (height - 7 * cell) / 2, cell, l_.scheme.paper);
  }
  int height() const { return h_; }
  DocumentLayout done() { return std::move(l_); }

 private:
  DocumentLayout l_;
  int h_ = 0;
};

constexpr double kId1 = 1.586;
using text::Typeface;

DocumentLayout paper_id_front() {
  Builder b(DocumentClass::PaperIdFront, 1.40, Typeface::Serif, {236, 228, 200}, {150, 110, 70});
  b.header("REPUBBLICA ITALIANA", 80, 3.4).photo(40, 130, 260, 360);
  b.field("surname", "COGNOME", 360, 130, 600, 44)
      .field("name", "NOME", 360, 205, 600, 44)
      .field("birth_date", "NATO IL", 360, 280, 260, 44)
      .field("birth_place", "A", 360, 355, 600, 44)
      .field("citizenship", "CITTADINANZA", 360, 430, 340, 44)
      .field("address", "RESIDENZA", 360, 505, 600, 44)
      .field("document_number", "N.", 40, 580, 300, 44);
  return b.done();
}

DocumentLayout paper_id_back() {
  Builder b(DocumentClass::PaperIdBack, 1.40, Typeface::Serif, {236, 228, 200}, {150, 110, 70});
  b.band(0, 0, 60, b.height(), {150, 110, 70}).band(720, 440, 220, 230, {222, 212, 182});
  b.field("height", "STATURA", 120, 90, 200, 44)
      .field("hair", "CAPELLI", 400, 90, 300, 44)
      .field("eyes", "OCCHI", 120, 170, 300, 44)
      .field("issue_date", "RILASCIATA IL", 120, 250, 260, 44)
      .field("expiry_date", "SCADENZA", 420, 250, 260, 44)
      .field("municipality", "COMUNE", 120, 330, 600, 44)
      .field("document_number", "N.", 120, 410, 300, 44);
  return b.done();
}

DocumentLayout electronic_id_front() {
  Builder b(DocumentClass::ElectronicIdFront, kId1, Typeface::Sans, {225, 232, 240}, {60, 100, 160});
  b.header("REPUBBLICA ITALIANA - CARTA DI IDENTITA", 72, 2.6).photo(40, 100, 260, 330);
  b.field("surname", "COGNOME", 330, 110, 620, 42)
      .field("name", "NOME", 330, 180, 620, 42)
      .field("birth_place", "LUOGO DI NASCITA", 330, 250, 400, 42)
      .field("birth_date", "DATA DI NASCITA", 750, 250, 210, 42)
      .field("sex", "SESSO", 330, 320, 90, 42)
      .field("issue_date", "EMISSIONE", 440, 320, 240, 42)
      .field("expiry_date", "SCADENZA", 700, 320, 240, 42)
      .field("document_number", "NUMERO", 330, 390, 300, 42);
  return b.done();
}

DocumentLayout electronic_id_back() {
  Builder b(DocumentClass::ElectronicIdBack, kId1, Typeface::Sans, {225, 232, 240}, {60, 100, 160});
  b.band(0, 0, 1000, 24, {60, 100, 160}).band(0, 420, 1000, b.height() - 420, kMrzBand);
  b.field("fiscal_code", "CODICE FISCALE", 40, 60, 520, 42)
      .field("address", "INDIRIZZO DI RESIDENZA", 40, 135, 920, 42)
      .field("mrz1", "", 40, 440, 920, 40, 2.8)
      .field("mrz2", "", 40, 492, 920, 40, 2.8)
      .field("mrz3", "", 40, 544, 920, 40, 2.8);
  return b.done();
}

DocumentLayout driving_license_front() {
  Builder b(DocumentClass::DrivingLicenseFront, kId1, Typeface::Sans, {240, 215, 220}, {180, 70, 90});
  b.header("PATENTE DI GUIDA", 72, 3.4).photo(40, 100, 250, 320);
  b.field("surname", "1.", 320, 105, 630, 42)
      .field("name", "2.", 320, 170, 630, 42)
      .field("birth_date", "3.", 320, 235, 220, 42)
      .field("birth_place", "", 560, 235, 390, 42)
      .field("issue_date", "4A.", 320, 300, 220, 42)
      .field("expiry_date", "4B.", 560, 300, 220, 42)
      .field("document_number", "5.", 320, 365, 360, 42)
      .field("categories", "9.", 320, 430, 360, 42);
  return b.done();
}

DocumentLayout driving_license_back() {
  Builder b(DocumentClass::DrivingLicenseBack, kId1, Typeface::Sans, {240, 215, 220}, {180, 70, 90});
  b.band(0, 580, 1000, b.height() - 580, {180, 70, 90}).ellipse(760, 60, 180, 180, {225, 190, 200});
  b.field("categories", "9.", 60, 70, 500, 42)
      .field("cat_issue_date", "10.", 60, 150, 240, 42)
      .field("cat_expiry_date", "11.", 340, 150, 240, 42)
      .field("restrictions", "12.", 60, 230, 420, 42)
      .field("document_number", "5.", 60, 480, 360, 42);
  return b.done();
}

DocumentLayout health_card_front() {
  Builder b(DocumentClass::HealthCardFront, kId1, Typeface::Sans, {205, 225, 210}, {40, 120, 80});
  b.header("TESSERA SANITARIA", 72, 3.4).band(60, 110, 120, 90, {200, 170, 80});
  b.ellipse(800, 460, 150, 150, {40, 120, 80});
  b.field("fiscal_code", "CODICE FISCALE", 220, 120, 560, 42)
      .field("surname", "COGNOME", 40, 230, 600, 42)
      .field("name", "NOME", 40, 300, 600, 42)
      .field("birth_place", "LUOGO DI NASCITA", 40, 370, 460, 42)
      .field("birth_date", "DATA DI NASCITA", 520, 370, 220, 42)
      .field("sex", "SESSO", 760, 370, 80, 42)
      .field("expiry_date", "SCADENZA", 40, 440, 240, 42);
  return b.done();
}

DocumentLayout health_card_back() {
  Builder b(DocumentClass::HealthCardBack, kId1, Typeface::Sans, {210, 220, 245}, {30, 60, 150});
  b.band(0, 0, 200, b.height(), {30, 60, 150}).ellipse(30, 40, 140, 140, {230, 200, 60});
  b.field("surname", "3. COGNOME", 240, 70, 700, 42)
      .field("name", "4. NOME", 240, 140, 700, 42)
      .field("birth_date", "5. DATA DI NASCITA", 240, 210, 240, 42)
      .field("personal_id", "6. NUMERO PERSONALE", 240, 280, 560, 42)
      .field("institution", "7. ISTITUZIONE", 240, 350, 560, 42)
      .field("card_id", "8. NUMERO TESSERA", 240, 420, 620, 42)
      .field("expiry_date", "9. SCADENZA", 240, 490, 240, 42);
  return b.done();
}

DocumentLayout passport() {
  Builder b(DocumentClass::Passport, 1.42, Typeface::Sans, {230, 220, 235}, {120, 40, 70});
  b.header("PASSAPORTO - PASSPORT", 72, 3.4).photo(40, 100, 260, 360).band(0, 540, 1000, b.height() - 540, kMrzBand);
  b.field("type", "TIPO", 330, 110, 70, 40)
      .field("country", "CODICE", 420, 110, 120, 40)
      .field("document_number", "PASSAPORTO N.", 570, 110, 260, 40)
      .field("surname", "COGNOME", 330, 175, 620, 40)
      .field("name", "NOME", 330, 240, 620, 40)
      .field("birth_date", "DATA DI NASCITA", 330, 305, 220, 40)
      .field("sex", "SESSO", 570, 305, 80, 40)
      .field("birth_place", "LUOGO DI NASCITA", 330, 370, 400, 40)
      .field("issue_date", "DATA DI RILASCIO", 330, 435, 220, 40)
      .field("expiry_date", "DATA DI SCADENZA", 570, 435, 220, 40)
      .field("mrz1", "", 40, 570, 920, 40, 2.8)
      .field("mrz2", "", 40, 630, 920, 40, 2.8);
  return b.done();
}

json rgb_json(Rgb c) { return json::array({c.r, c.g, c.b}); }
Rgb rgb_from(const json& j) {
  const auto v = j.get<std::vector<int>>();
  if (v.size() != 3) throw Error(ErrorKind::FormatError, "color must have three channels");
  for (int c : v)
    if (c < 0 || c > 255) throw Error(ErrorKind::FormatError, "color channel out of range");
  return {std::uint8_t(v[0]), std::uint8_t(v[1]), std::uint8_t(v[2])};
}
json rect_json(const NormRect& r) { return json::array({r.x, r.y, r.w, r.h}); }
NormRect rect_from(const json& j) {
  const auto v = j.get<std::vector<double>>();
  if (v.size() != 4) throw Error(ErrorKind::FormatError, "rect must have four numbers");
  return {v[0], v[1], v[2], v[3]};
}

constexpr const char* kDecorationNames[] = {"band", "text", "photo", "ellipse"};

}  // namespace

Registry default_registry() {
  Registry reg;
  for (auto l : {paper_id_front(), paper_id_back(), electronic_id_front(), electronic_id_back(), driving_license_front(),
                 driving_license_back(), health_card_front(), health_card_back(), passport()}) {
    l.validate();
    reg.emplace(l.cls, std::move(l));
  }
  return reg;
}

const DocumentLayout& find_layout(const Registry& reg, DocumentClass cls) {
  const auto it = reg.find(cls);
  if (it == reg.end()) throw Error(ErrorKind::MissingLayout, "no layout for class " + std::string(class_name(cls)));
  return it->second;
}

std::string registry_to_json(const Registry& reg) {
  json layouts = json::array();
  for (const auto& [cls, l] : reg) {
    json fields = json::array();
    for (const auto& f : l.fields)
      fields.push_back({{"name", f.name}, {"rect", rect_json(f.rect)}, {"font_size", f.cell}, {"color", rgb_json(f.color)}});
    json decorations = json::array();
    for (const auto& d : l.decorations) {
      json j{{"kind", kDecorationNames[static_cast<int>(d.kind)]}, {"rect", rect_json(d.rect)}, {"color", rgb_json(d.color)}};
      if (d.kind == DecorationKind::Text) {
        j["text"] = d.text;
        j["font_size"] = d.cell;
      }
      decorations.push_back(std::move(j));
    }
    layouts.push_back({{"class", class_name(cls)},
                       {"code", code(cls)},
                       {"aspect_ratio", l.aspect_ratio},
                       {"base_width", l.base_width},
                       {"typeface", text::typeface_name(l.typeface)},
                       {"scheme", {{"paper", rgb_json(l.scheme.paper)}, {"accent", rgb_json(l.scheme.accent)}}},
                       {"fields", std::move(fields)},
                       {"decorations", std::move(decorations)}});
  }
  return json{{"layouts", std::move(layouts)}}.dump(2) + "\n";
}

Registry registry_from_json(const std::string& text) {
  Registry reg;
  try {
    const json root = json::parse(text);
    for (const auto& j : root.at("layouts")) {
      DocumentLayout l;
      const auto cls = class_from_name(j.at("class").get<std::string>());
      if (!cls) throw Error(ErrorKind::FormatError, "unknown class " + j.at("class").get<std::string>());
      l.cls = *cls;
      l.aspect_ratio = j.at("aspect_ratio").get<double>();
      l.base_width = j.value("base_width", 1000);
      l.typeface = text::typeface_from_name(j.value("typeface", "sans"));
      l.scheme = {rgb_from(j.at("scheme").at("paper")), rgb_from(j.at("scheme").at("accent"))};
      for (const auto& f : j.at("fields"))
        l.fields.push_back({f.at("name").get<std::string>(), rect_from(f.at("rect")), f.value("font_size", 3.0),
                            f.contains("color") ? rgb_from(f.at("color")) : kInk});
      if (j.contains("decorations")) {
        for (const auto& d : j.at("decorations")) {
          Decoration dec;
          const auto kind = d.at("kind").get<std::string>();
          const auto it = std::find(std::begin(kDecorationNames), std::end(kDecorationNames), kind);
          if (it == std::end(kDecorationNames)) throw Error(ErrorKind::FormatError, "unknown decoration " + kind);
          dec.kind = static_cast<DecorationKind>(it - std::begin(kDecorationNames));
          dec.rect = rect_from(d.at("rect"));
          dec.color = rgb_from(d.at("color"));
          dec.text = d.value("text", "");
          dec.cell = d.value("font_size", 0.0);
          l.decorations.push_back(std::move(dec));
        }
      }
      l.validate();
      if (!reg.emplace(l.cls, std::move(l)).second) throw Error(ErrorKind::FormatError, "duplicate layout class");
    }
  } catch (const json::exception& e) {
    throw Error(ErrorKind::FormatError, std::string("layout registry: ") + e.what());
  }
  return reg;
}

Registry load_registry(const std::filesystem::path& path) {
  const auto bytes = raster::read_file(path);
  return registry_from_json(std::string(bytes.begin(), bytes.end()));
}

void save_registry(const Registry& reg, const std::filesystem::path& path) {
  const std::string s = registry_to_json(reg);
  raster::write_file(path, std::span(reinterpret_cast<const std::uint8_t*>(s.data()), s.size()));
}

}  // namespace idread::layout
