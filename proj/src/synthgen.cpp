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


#include "idread/synthgen.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numbers>

#include "idread/extractor.hpp"
#include "json.hpp"

namespace idread::synth {

using raster::Point;
using raster::Rgb;
namespace chr = std::chrono;

// ---------------------------------------------------------------------------
// Dates

namespace {

chr::year_month_day ymd(const Date& d) {
  return chr::year_month_day{chr::year{d.year}, chr::month{static_cast<unsigned>(d.month)},
                             chr::day{static_cast<unsigned>(d.day)}};
}

Date from_ymd(const chr::year_month_day& v) {
  return {static_cast<int>(v.year()), static_cast<int>(static_cast<unsigned>(v.month())),
          static_cast<int>(static_cast<unsigned>(v.day()))};
}

std::string two(int v) {
  char b[8];
  std::snprintf(b, sizeof b, "%02d", v % 100);
  return b;
}

}  // namespace

std::string Date::display() const {
  char b[16];
  std::snprintf(b, sizeof b, "%02d.%02d.%04d", day, month, year);
  return b;
}

std::string Date::mrz() const { return two(year) + two(month) + two(day); }

Date Date::plus_days(int days) const { return from_ymd(chr::year_month_day{chr::sys_days{ymd(*this)} + chr::days{days}}); }

Date Date::plus_years(int years) const {
  auto v = ymd(*this) + chr::years{years};
  if (!v.ok()) v = chr::year_month_day{chr::year_month_day_last{v.year(), chr::month_day_last{v.month()}}};
  return from_ymd(v);
}

// ---------------------------------------------------------------------------
// Lists

namespace {

std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::IoError, "cannot read list " + path.string());
  std::vector<std::string> out;
  for (std::string line; std::getline(in, line);) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    if (!line.empty()) out.push_back(line);
  }
  return out;
}

}  // namespace

NameLists NameLists::load(const std::filesystem::path& dir) {
  NameLists l;
  l.surnames = read_lines(dir / "surnames.txt");
  l.male_names = read_lines(dir / "names_male.txt");
  l.female_names = read_lines(dir / "names_female.txt");
  l.streets = read_lines(dir / "streets.txt");
  for (const auto& line : read_lines(dir / "places.txt")) {
    const auto sp = line.find(' ');
    if (sp != 4) throw Error(ErrorKind::FormatError, "places.txt: expected 'CODE NAME', got '" + line + "'");
    l.places.push_back({line.substr(0, 4), line.substr(5)});
  }
  return l;
}

const NameLists& default_lists() {
  static const NameLists lists = NameLists::load(IDREAD_DATA_DIR);
  return lists;
}

// ---------------------------------------------------------------------------
// People

namespace {

template <typename T>
const T& pick(const std::vector<T>& v, Rng& rng) {
  std::uniform_int_distribution<std::size_t> d(0, v.size() - 1);
  return v[d(rng)];
}

int uniform_int(Rng& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }
double uniform(Rng& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

char random_letter(Rng& rng) { return static_cast<char>('A' + uniform_int(rng, 0, 25)); }
char random_digit(Rng& rng) { return static_cast<char>('0' + uniform_int(rng, 0, 9)); }

std::string digits(Rng& rng, int n) {
  std::string s;
  for (int i = 0; i < n; ++i) s.push_back(random_digit(rng));
  return s;
}
std::string letters(Rng& rng, int n) {
  std::string s;
  for (int i = 0; i < n; ++i) s.push_back(random_letter(rng));
  return s;
}

int validity_years(DocumentClass cls) {
  switch (cls) {
    case DocumentClass::HealthCardFront:
    case DocumentClass::HealthCardBack: return 6;
    default: return 10;
  }
}

std::string document_number(DocumentClass cls, Rng& rng) {
  switch (cls) {
    case DocumentClass::PaperIdFront:
    case DocumentClass::PaperIdBack: return letters(rng, 2) + digits(rng, 7);
    case DocumentClass::ElectronicIdFront:
    case DocumentClass::ElectronicIdBack: return "C" + letters(rng, 1) + digits(rng, 5) + letters(rng, 2);
    case DocumentClass::DrivingLicenseFront:
    case DocumentClass::DrivingLicenseBack: return "U1" + digits(rng, 7) + letters(rng, 1);
    case DocumentClass::HealthCardFront:
    case DocumentClass::HealthCardBack: return "80380" + digits(rng, 15);
    case DocumentClass::Passport: return letters(rng, 2) + digits(rng, 7);
  }
  return {};
}

}  // namespace

PersonRecord gen_person(Rng& rng, const NameLists& lists, DocumentClass cls) {
  if (lists.surnames.empty() || lists.male_names.empty() || lists.female_names.empty() || lists.places.empty() ||
      lists.streets.empty())
    throw Error(ErrorKind::EmptyList, "every name/place/street list must be non-empty");
  PersonRecord p;
  p.sex = std::bernoulli_distribution(0.5)(rng) ? 'M' : 'F';
  p.surname = pick(lists.surnames, rng);
  p.name = pick(p.sex == 'M' ? lists.male_names : lists.female_names, rng);
  p.birthdate = kReferenceDate.plus_days(-uniform_int(rng, 18 * 366, 90 * 365));
  p.release_date = kReferenceDate.plus_days(-uniform_int(rng, 0, 10 * 365 - 1));
  p.expiry_date = p.release_date.plus_years(validity_years(cls));
  p.birthplace = pick(lists.places, rng);
  p.address = pick(lists.streets, rng) + " " + std::to_string(uniform_int(rng, 1, 199));
  p.residence = pick(lists.places, rng).name;
  p.document_number = document_number(cls, rng);
  p.fiscal_code = fiscal_code(p.surname, p.name, p.sex, p.birthdate, p.birthplace.code);
  return p;
}

// ---------------------------------------------------------------------------
// Fiscal code

namespace {

bool is_vowel(char c) { return c == 'A' || c == 'E' || c == 'I' || c == 'O' || c == 'U'; }

std::string letters_only(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == ' ') continue;
    if (c < 'A' || c > 'Z') throw Error(ErrorKind::InvalidName, "names must be uppercase ASCII letters: '" + s + "'");
    out.push_back(c);
  }
  if (out.empty()) throw Error(ErrorKind::InvalidName, "empty name");
  return out;
}

std::string name_part(const std::string& raw, bool given_name) {
  const std::string s = letters_only(raw);
  std::string cons, vow;
  for (char c : s) (is_vowel(c) ? vow : cons).push_back(c);
  if (given_name && cons.size() >= 4) return {cons[0], cons[2], cons[3]};
  std::string r = cons + vow + "XXX";
  return r.substr(0, 3);
}

// Values of characters in odd (1st, 3rd, ...) positions; A-Z and 0-9 share
// the same sequence.
constexpr int kOdd[26] = {1, 0, 5, 7, 9, 13, 15, 17, 19, 21, 2, 4, 18, 20, 11, 3, 6, 8, 12, 14, 16, 10, 22, 25, 24, 23};

}  // namespace

std::string fiscal_code(const std::string& surname, const std::string& name, char sex, const Date& birth,
                        const std::string& cadastral) {
  if (sex != 'M' && sex != 'F') throw Error(ErrorKind::InvalidArgument, "sex must be M or F");
  if (cadastral.size() != 4) throw Error(ErrorKind::InvalidArgument, "cadastral code must have 4 characters");
  if (!ymd(birth).ok()) throw Error(ErrorKind::InvalidArgument, "invalid birth date");
  static constexpr char kMonths[] = "ABCDEHLMPRST";
  std::string code = name_part(surname, false) + name_part(name, true) + two(birth.year) + kMonths[birth.month - 1] +
                     two(birth.day + (sex == 'F' ? 40 : 0)) + cadastral;
  int sum = 0;
  for (std::size_t i = 0; i < code.size(); ++i) {
    const char c = code[i];
    const int v = (c >= '0' && c <= '9') ? c - '0' : c - 'A';
    sum += (i % 2 == 0) ? kOdd[v] : v;
  }
  code.push_back(static_cast<char>('A' + sum % 26));
  return code;
}

// ---------------------------------------------------------------------------
// MRZ

char mrz_check_digit(std::string_view s) {
  static constexpr int kWeights[3] = {7, 3, 1};
  int sum = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const char c = s[i];
    int v = 0;
    if (c >= '0' && c <= '9') v = c - '0';
    else if (c >= 'A' && c <= 'Z') v = c - 'A' + 10;
    sum += v * kWeights[i % 3];
  }
  return static_cast<char>('0' + sum % 10);
}

namespace {

std::string mrz_text(const std::string& s) {
  std::string r = s;
  std::replace(r.begin(), r.end(), ' ', '<');
  return r;
}

std::string pad(std::string s, std::size_t n) {
  s.resize(n, '<');
  return s;
}

std::string mrz_names(const PersonRecord& p, std::size_t n) {
  return pad(mrz_text(p.surname) + "<<" + mrz_text(p.name), n);
}

}  // namespace

std::array<std::string, 3> mrz_td1(const PersonRecord& p) {
  const std::string doc = pad(p.document_number, 9);
  const std::string l1 = pad("C<ITA" + doc + mrz_check_digit(doc), 30);
  std::string l2 = p.birthdate.mrz() + mrz_check_digit(p.birthdate.mrz()) + p.sex + p.expiry_date.mrz() +
                   mrz_check_digit(p.expiry_date.mrz()) + "ITA" + std::string(11, '<');
  l2 += mrz_check_digit(l1.substr(5) + l2.substr(0, 7) + l2.substr(8, 7) + l2.substr(18, 11));
  return {l1, l2, mrz_names(p, 30)};
}

std::array<std::string, 2> mrz_td3(const PersonRecord& p) {
  const std::string l1 = "P<ITA" + mrz_names(p, 39);
  const std::string doc = pad(p.document_number, 9);
  const std::string personal(14, '<');
  std::string l2 = doc + mrz_check_digit(doc) + "ITA" + p.birthdate.mrz() + mrz_check_digit(p.birthdate.mrz()) + p.sex +
                   p.expiry_date.mrz() + mrz_check_digit(p.expiry_date.mrz()) + personal + mrz_check_digit(personal);
  l2 += mrz_check_digit(l2.substr(0, 10) + l2.substr(13, 7) + l2.substr(21, 22));
  return {l1, l2};
}

// ---------------------------------------------------------------------------
// Field values

namespace {

const std::vector<std::string> kHair{"CASTANI", "BIONDI", "NERI", "ROSSI", "GRIGI"};
const std::vector<std::string> kEyes{"CASTANI", "AZZURRI", "VERDI", "NERI", "GRIGI"};
const std::vector<std::string> kCategories{"AM", "A1", "A2", "A", "B1", "B", "BE", "C1", "C", "D"};
const std::vector<std::string> kRestrictions{"01", "01.01", "01.02", "70", "78", "95"};

std::string join_random(const std::vector<std::string>& items, int min_n, int max_n, const char* sep, Rng& rng) {
  const int n = uniform_int(rng, min_n, max_n);
  std::vector<std::size_t> idx(items.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::shuffle(idx.begin(), idx.end(), rng);
  idx.resize(static_cast<std::size_t>(n));
  std::sort(idx.begin(), idx.end());
  std::string s;
  for (std::size_t i : idx) s += (s.empty() ? "" : sep) + items[i];
  return s;
}

std::string value_for(const std::string& field, DocumentClass cls, const PersonRecord& p, Rng& rng) {
  if (field == "surname") return p.surname;
  if (field == "name") return p.name;
  if (field == "sex") return std::string(1, p.sex);
  if (field == "birth_date") return p.birthdate.display();
  if (field == "birth_place") return p.birthplace.name;
  if (field == "citizenship") return "ITALIANA";
  if (field == "address") return p.address;
  if (field == "municipality") return p.residence;
  if (field == "document_number" || field == "card_id") return p.document_number;
  if (field == "fiscal_code" || field == "personal_id") return p.fiscal_code;
  if (field == "issue_date" || field == "cat_issue_date") return p.release_date.display();
  if (field == "expiry_date" || field == "cat_expiry_date") return p.expiry_date.display();
  if (field == "height") return std::to_string(uniform_int(rng, 150, 195));
  if (field == "hair") return pick(kHair, rng);
  if (field == "eyes") return pick(kEyes, rng);
  if (field == "categories") return join_random(kCategories, 1, 4, "/", rng);
  if (field == "restrictions") return join_random(kRestrictions, 1, 3, " ", rng);
  if (field == "type") return "P";
  if (field == "country") return "ITA";
  if (field == "institution") return "80001 - SSN-MIN SALUTE";
  if (field.rfind("mrz", 0) == 0 && field.size() == 4) {
    const int line = field[3] - '1';
    if (cls == DocumentClass::Passport) {
      const auto m = mrz_td3(p);
      if (line >= 0 && line < 2) return m[static_cast<std::size_t>(line)];
    } else {
      const auto m = mrz_td1(p);
      if (line >= 0 && line < 3) return m[static_cast<std::size_t>(line)];
    }
  }
  // Fields of user-supplied layouts without a known meaning.
  return letters(rng, 3) + digits(rng, 5);
}

std::string fit(std::string s, const layout::DocumentLayout& l, const layout::FieldSpec& f) {
  const double cap = field_capacity(l, f);
  while (!s.empty() && text::text_width(s, l.typeface) * f.cell > cap) s.pop_back();
  while (!s.empty() && s.back() == ' ') s.pop_back();
  return s;
}

}  // namespace

double field_capacity(const layout::DocumentLayout& layout, const layout::FieldSpec& field) {
  return field.rect.w * layout.base_width - 4 * field.cell;
}

FieldValues person_fields(const layout::DocumentLayout& layout, const PersonRecord& p, Rng& rng) {
  FieldValues v;
  for (const auto& f : layout.fields) v[f.name] = value_for(f.name, layout.cls, p, rng);
  return v;
}

FieldValues random_fields(const layout::DocumentLayout& layout, const NameLists& lists, Rng& rng) {
  const PersonRecord p = gen_person(rng, lists, layout.cls);
  FieldValues v = person_fields(layout, p, rng);
  for (const auto& f : layout.fields) {
    std::string& s = v[f.name];
    for (char& c : s) {
      if (c >= 'A' && c <= 'Z') c = random_letter(rng);
      else if (c >= '0' && c <= '9') c = random_digit(rng);
    }
    s = fit(s, layout, f);
  }
  return v;
}

// ---------------------------------------------------------------------------
// Rendering

namespace {

void blend(std::uint8_t* p, Rgb c, double a) {
  p[0] = static_cast<std::uint8_t>(round_even_l(p[0] * (1 - a) + c.r * a));
  p[1] = static_cast<std::uint8_t>(round_even_l(p[1] * (1 - a) + c.g * a));
  p[2] = static_cast<std::uint8_t>(round_even_l(p[2] * (1 - a) + c.b * a));
}

void fill_rect(Image& img, int x0, int y0, int x1, int y1, Rgb c) {
  x0 = std::max(0, x0), y0 = std::max(0, y0);
  x1 = std::min(img.width(), x1), y1 = std::min(img.height(), y1);
  for (int y = y0; y < y1; ++y)
    for (int x = x0; x < x1; ++x) img.set(x, y, c);
}

void fill_ellipse(Image& img, double x0, double y0, double x1, double y1, Rgb c, double clip_y = 1e9) {
  const double cx = (x0 + x1) / 2, cy = (y0 + y1) / 2, rx = (x1 - x0) / 2, ry = (y1 - y0) / 2;
  if (rx <= 0 || ry <= 0) return;
  for (int y = std::max(0, int(y0)); y < std::min({img.height(), int(std::ceil(y1)), int(clip_y)}); ++y)
    for (int x = std::max(0, int(x0)); x < std::min(img.width(), int(std::ceil(x1))); ++x) {
      const double dx = (x + 0.5 - cx) / rx, dy = (y + 0.5 - cy) / ry;
      if (dx * dx + dy * dy <= 1) img.set(x, y, c);
    }
}

// Low-contrast interference lines in the accent color.
void guilloche(Image& img, Rgb accent, Rng& rng) {
  const double f1 = uniform(rng, 0.030, 0.050), f2 = uniform(rng, 0.010, 0.020);
  const double a1 = uniform(rng, 8, 20), p1 = uniform(rng, 0, 6.3), p2 = uniform(rng, 0, 6.3);
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x) {
      const double u = std::sin(f1 * x + a1 * std::sin(f2 * y + p1) * 0.1 + p2);
      const double v = std::sin(f1 * y + a1 * std::sin(f2 * x + p2) * 0.1 + p1);
      const double line = std::max(std::abs(u), std::abs(v));
      if (line > 0.93) blend(img.pixel(x, y), accent, 0.10 * (line - 0.93) / 0.07);
    }
}

}  // namespace

Rendered render_document(const layout::DocumentLayout& layout, const FieldValues& values, Rng& rng) {
  const int w = layout.base_width, h = layout.base_height();
  Image img(w, h, layout.scheme.paper);
  guilloche(img, layout.scheme.accent, rng);
  for (const auto& d : layout.decorations) {
    const double x0 = d.rect.x * w, y0 = d.rect.y * h, x1 = x0 + d.rect.w * w, y1 = y0 + d.rect.h * h;
    switch (d.kind) {
      case layout::DecorationKind::Band:
        fill_rect(img, int(round_even_l(x0)), int(round_even_l(y0)), int(round_even_l(x1)), int(round_even_l(y1)), d.color);
        break;
      case layout::DecorationKind::Ellipse: fill_ellipse(img, x0, y0, x1, y1, d.color); break;
      case layout::DecorationKind::Photo: {
        // Neutral portrait placeholder: head and shoulders silhouettes.
        fill_rect(img, int(round_even_l(x0)), int(round_even_l(y0)), int(round_even_l(x1)), int(round_even_l(y1)), d.color);
        const double bw = x1 - x0, bh = y1 - y0;
        const Rgb shade{150, 150, 155};
        fill_ellipse(img, x0 + 0.10 * bw, y0 + 0.62 * bh, x1 - 0.10 * bw, y1 + 0.38 * bh, shade, round_even(y1));
        fill_ellipse(img, x0 + 0.28 * bw, y0 + 0.15 * bh, x1 - 0.28 * bw, y0 + 0.62 * bh, shade);
        break;
      }
      case layout::DecorationKind::Text: text::draw_text(img, x0, y0, d.text, layout.typeface, d.cell, d.color); break;
    }
  }
  Rendered out{Image(), {}};
  for (const auto& f : layout.fields) {
    const auto it = values.find(f.name);
    if (it == values.end()) throw Error(ErrorKind::InvalidArgument, "no value for field " + f.name);
    const std::string& s = it->second;
    for (char c : s)
      if (!text::in_charset(c))
        throw Error(ErrorKind::InvalidArgument, "field " + f.name + " has a character outside the charset");
    const double width = text::text_width(s, layout.typeface) * f.cell;
    if (width > field_capacity(layout, f))
      throw Error(ErrorKind::TextOverflow, "'" + s + "' does not fit field " + f.name + " of " +
                                               std::string(class_name(layout.cls)));
    const double bx = f.rect.x * w, by = f.rect.y * h, bh = f.rect.h * h;
    text::draw_text(img, bx + 2 * f.cell, by + (bh - text::kGlyphRows * f.cell) / 2, s, layout.typeface, f.cell, f.color);
    out.truth[f.name] = s;
  }
  out.image = std::move(img);
  return out;
}

// ---------------------------------------------------------------------------
// Backgrounds

namespace {

Rgb random_color(Rng& rng) {
  return {std::uint8_t(uniform_int(rng, 0, 255)), std::uint8_t(uniform_int(rng, 0, 255)),
          std::uint8_t(uniform_int(rng, 0, 255))};
}

Rgb mix(Rgb a, Rgb b, double t) {
  t = std::clamp(t, 0.0, 1.0);
  auto m = [t](int u, int v) { return static_cast<std::uint8_t>(round_even_l(u + (v - u) * t)); };
  return {m(a.r, b.r), m(a.g, b.g), m(a.b, b.b)};
}

// Smooth value noise on a lattice of the given spacing, in [0, 1].
class ValueNoise {
 public:
  ValueNoise(int width, int height, double spacing, Rng& rng)
      : spacing_(spacing), nx_(int(width / spacing) + 2), ny_(int(height / spacing) + 2),
        grid_(static_cast<std::size_t>(nx_) * ny_) {
    std::uniform_real_distribution<double> u(0, 1);
    for (auto& g : grid_) g = u(rng);
  }
  double operator()(double x, double y) const {
    const double gx = x / spacing_, gy = y / spacing_;
    const int ix = std::min(int(gx), nx_ - 2), iy = std::min(int(gy), ny_ - 2);
    const double tx = smooth(gx - ix), ty = smooth(gy - iy);
    auto at = [&](int i, int j) { return grid_[static_cast<std::size_t>(j) * nx_ + i]; };
    const double a = at(ix, iy) + (at(ix + 1, iy) - at(ix, iy)) * tx;
    const double b = at(ix, iy + 1) + (at(ix + 1, iy + 1) - at(ix, iy + 1)) * tx;
    return a + (b - a) * ty;
  }

 private:
  static double smooth(double t) { return t * t * (3 - 2 * t); }
  double spacing_;
  int nx_, ny_;
  std::vector<double> grid_;
};

double fractal(const std::vector<ValueNoise>& octaves, double x, double y) {
  double v = 0, amp = 1, total = 0;
  for (const auto& o : octaves) {
    v += amp * o(x, y);
    total += amp;
    amp *= 0.5;
  }
  return v / total;
}

std::vector<ValueNoise> octaves(int w, int h, double spacing, int n, Rng& rng) {
  std::vector<ValueNoise> o;
  for (int i = 0; i < n; ++i, spacing /= 2) o.emplace_back(w, h, std::max(2.0, spacing), rng);
  return o;
}

}  // namespace

Image make_background(BackgroundKind kind, int width, int height, Rng& rng) {
  Image img(width, height);
  const Rgb a = random_color(rng), b = random_color(rng);
  switch (kind) {
    case BackgroundKind::Gradient: {
      const double ang = uniform(rng, 0, 2 * std::numbers::pi);
      const double cx = std::cos(ang), cy = std::sin(ang);
      const double span = std::abs(cx) * width + std::abs(cy) * height;
      for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x) {
          const double t = ((x - width / 2.0) * cx + (y - height / 2.0) * cy) / span + 0.5;
          img.set(x, y, mix(a, b, t));
        }
      break;
    }
    case BackgroundKind::Wood: {
      const Rgb light{std::uint8_t(uniform_int(rng, 150, 220)), std::uint8_t(uniform_int(rng, 100, 160)),
                      std::uint8_t(uniform_int(rng, 50, 100))};
      const Rgb dark = mix(light, Rgb{40, 20, 10}, uniform(rng, 0.3, 0.6));
      const auto n = octaves(width, height, 200, 3, rng);
      const double cx = uniform(rng, -width, 2.0 * width), cy = uniform(rng, -height * 3.0, -height * 1.0);
      const double freq = uniform(rng, 0.03, 0.08);
      for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x) {
          const double r = std::hypot((x - cx) * 0.3, y - cy) + 60 * fractal(n, x, y);
          img.set(x, y, mix(light, dark, 0.5 + 0.5 * std::sin(r * freq)));
        }
      break;
    }
    case BackgroundKind::Stripes: {
      const double ang = uniform(rng, 0, std::numbers::pi);
      const double period = uniform(rng, 12, 80), duty = uniform(rng, 0.3, 0.7);
      const double cx = std::cos(ang), cy = std::sin(ang);
      for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x) {
          const double t = std::fmod(std::abs(x * cx + y * cy), period) / period;
          img.set(x, y, t < duty ? a : b);
        }
      break;
    }
    case BackgroundKind::Noise: {
      const auto n = octaves(width, height, uniform(rng, 60, 300), 4, rng);
      for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x) img.set(x, y, mix(a, b, fractal(n, x, y) * 1.6 - 0.3));
      break;
    }
    case BackgroundKind::Tiles: {
      const int tile = uniform_int(rng, 60, 220), grout = uniform_int(rng, 2, 8);
      const Rgb g = mix(a, b, 0.8);
      std::vector<double> shade(static_cast<std::size_t>((width / tile + 2) * (height / tile + 2)));
      for (auto& s : shade) s = uniform(rng, -0.08, 0.08);
      const int per_row = width / tile + 2;
      for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x) {
          const bool line = x % tile < grout || y % tile < grout;
          img.set(x, y, line ? g : mix(a, b, 0.5 * (1 + shade[static_cast<std::size_t>((y / tile) * per_row + x / tile)]) - 0.5));
        }
      break;
    }
    case BackgroundKind::Speckle: {
      const Rgb c = random_color(rng);
      const double density = uniform(rng, 0.05, 0.3);
      std::bernoulli_distribution dot(density);
      std::uniform_real_distribution<double> t(0, 1);
      for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x) img.set(x, y, dot(rng) ? mix(b, c, t(rng)) : a);
      break;
    }
  }
  return img;
}

Image make_background(int width, int height, Rng& rng) {
  const auto kind = static_cast<BackgroundKind>(uniform_int(rng, 0, kBackgroundKinds - 1));
  Image img = make_background(kind, width, height, rng);
  // Uneven illumination.
  const double gx = uniform(rng, -0.2, 0.2), gy = uniform(rng, -0.2, 0.2);
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x) {
      const double f = 1 + gx * (double(x) / width - 0.5) + gy * (double(y) / height - 0.5);
      std::uint8_t* p = img.pixel(x, y);
      for (int k = 0; k < 3; ++k) p[k] = static_cast<std::uint8_t>(std::clamp(round_even_l(p[k] * f), 0L, 255L));
    }
  return img;
}

// ---------------------------------------------------------------------------
// Compositing

namespace {

Point outward(const Point& v, const Point& c, double len) {
  const double dx = v.x - c.x, dy = v.y - c.y, n = std::hypot(dx, dy);
  return {v.x + dx / n * len, v.y + dy / n * len};
}

bool strictly_inside_rect(const Point& p, double x0, double y0, double x1, double y1) {
  return p.x > x0 && p.x < x1 && p.y > y0 && p.y < y1;
}

}  // namespace

Composite composite_on_background(const Image& doc, const Image& background, Rng& rng, const PlacementParams& params) {
  const int W = background.width(), H = background.height();
  if (W < 1.5 * doc.width() || H < 1.5 * doc.height())
    throw Error(ErrorKind::InvalidArgument, "background must be at least 1.5x the document size");
  const double fx0 = params.outer_frac * W, fy0 = params.outer_frac * H;
  const double fx1 = (1 - params.outer_frac) * W, fy1 = (1 - params.outer_frac) * H;
  const double sx0 = params.inner_frac * W, sy0 = params.inner_frac * H;
  const double sx1 = (1 - params.inner_frac) * W, sy1 = (1 - params.inner_frac) * H;

  for (int attempt = 0; attempt < params.attempts; ++attempt) {
    const double scale = uniform(rng, params.min_height_frac, params.max_height_frac) * H / doc.height();
    const double theta = uniform(rng, -params.max_rotation_deg, params.max_rotation_deg) * std::numbers::pi / 180;
    const Point center{W / 2.0 + uniform(rng, -1, 1) * params.max_offset_frac * W,
                       H / 2.0 + uniform(rng, -1, 1) * params.max_offset_frac * H};
    const double hw = doc.width() * scale / 2, hh = doc.height() * scale / 2;
    const double c = std::cos(theta), s = std::sin(theta);
    Quad q;
    const Point local[4] = {{-hw, -hh}, {hw, -hh}, {hw, hh}, {-hw, hh}};
    for (int i = 0; i < 4; ++i)
      q.v[i] = {center.x + local[i].x * c - local[i].y * s, center.y + local[i].x * s + local[i].y * c};

    const double margin = params.margin_frac * q.shortest_side();
    const Point qc = q.centroid();
    bool ok = q.valid();
    for (int i = 0; ok && i < 4; ++i) {
      const Point far = outward(q.v[i], qc, margin);
      ok = far.x >= fx0 && far.x <= fx1 && far.y >= fy0 && far.y <= fy1 &&
           !strictly_inside_rect(q.v[i], sx0, sy0, sx1, sy1);
    }
    for (const Point& corner : Quad::rect(sx0, sy0, sx1, sy1).v) ok = ok && raster::point_in_quad(corner, q);
    if (!ok) continue;

    const auto to_doc = raster::solve_homography(
        q.v, Quad::rect(0, 0, doc.width(), doc.height()).v);
    Composite out{background, q};
    double bx0 = W, by0 = H, bx1 = 0, by1 = 0;
    for (const Point& v : q.v) {
      bx0 = std::min(bx0, v.x), by0 = std::min(by0, v.y), bx1 = std::max(bx1, v.x), by1 = std::max(by1, v.y);
    }
    for (int y = std::max(0, int(by0)); y < std::min(H, int(std::ceil(by1)) + 1); ++y)
      for (int x = std::max(0, int(bx0)); x < std::min(W, int(std::ceil(bx1)) + 1); ++x) {
        const Point pc{x + 0.5, y + 0.5};
        if (!raster::point_in_quad(pc, q)) continue;
        const Point d = to_doc.apply(pc);
        const auto v = raster::sample_bilinear(doc, d.x, d.y);
        std::uint8_t* p = out.photo.pixel(x, y);
        for (int k = 0; k < 3; ++k) p[k] = static_cast<std::uint8_t>(std::clamp(round_even_l(v[k]), 0L, 255L));
      }
    return out;
  }
  throw Error(ErrorKind::PlacementInfeasible, "could not place the document within the frame constraints");
}

// ---------------------------------------------------------------------------
// Degradation

void DegradationParams::validate() const {
  if (!(persp_min >= 0 && persp_min <= persp_max && persp_max < 0.5))
    throw Error(ErrorKind::InvalidArgument, "need 0 <= persp_min <= persp_max < 0.5");
  if (!(alpha_min <= alpha_max) || !(beta_min <= beta_max)) throw Error(ErrorKind::InvalidArgument, "empty alpha/beta range");
  if (!(noise_sigma >= 0)) throw Error(ErrorKind::InvalidArgument, "noise sigma must be >= 0");
  if (jpeg_quality < 1 || jpeg_quality > 100) throw Error(ErrorKind::InvalidQuality, "JPEG quality must be in [1, 100]");
}

Composite perturb_vertices(const Image& photo, const Quad& quad, const DegradationParams& params, Rng& rng) {
  params.validate();
  const double l = quad.shortest_side();
  const Point c = quad.centroid();
  Quad moved = quad;
  bool any = false;
  for (int i = 0; i < 4; ++i) {
    const double len = uniform(rng, params.persp_min * l, params.persp_max * l);
    if (len == 0) continue;
    any = true;
    moved.v[i] = outward(quad.v[i], c, len);
    if (moved.v[i].x < 0 || moved.v[i].y < 0 || moved.v[i].x > photo.width() || moved.v[i].y > photo.height())
      throw Error(ErrorKind::PlacementInfeasible, "perturbed vertex leaves the photo");
  }
  if (!any) return {photo, quad};
  const auto back = raster::solve_homography(moved.v, quad.v);
  return {raster::warp_homography(photo, back, photo.width(), photo.height()), moved};
}

Image adjust_contrast_brightness(const Image& img, double alpha, double beta) {
  Image out = img;
  std::uint8_t lut[256];
  for (int v = 0; v < 256; ++v) lut[v] = static_cast<std::uint8_t>(std::clamp(round_even_l(alpha * v + beta), 0L, 255L));
  for (auto& b : out.bytes()) b = lut[b];
  return out;
}

Image add_gaussian_noise(const Image& img, double sigma, Rng& rng) {
  if (sigma <= 0) return img;
  Image out = img;
  std::normal_distribution<double> n(0, sigma);
  for (auto& b : out.bytes()) b = static_cast<std::uint8_t>(std::clamp(round_even_l(b + n(rng)), 0L, 255L));
  return out;
}

Degraded degrade_pipeline(const Image& photo, const Quad& quad, const DegradationParams& params, Rng& rng) {
  params.validate();
  Composite c = perturb_vertices(photo, quad, params, rng);
  const double alpha = uniform(rng, params.alpha_min, params.alpha_max);
  const double beta = uniform(rng, params.beta_min, params.beta_max);
  Image img = adjust_contrast_brightness(c.photo, alpha, beta);
  img = add_gaussian_noise(img, params.noise_sigma, rng);
  Degraded d{Image(), c.quad, raster::encode_jpeg(img, params.jpeg_quality)};
  d.image = raster::decode_jpeg(d.jpeg);
  return d;
}

// ---------------------------------------------------------------------------
// Manifests

using ojson = nlohmann::ordered_json;

std::string to_json_line(const SampleRecord& r) {
  ojson quad = ojson::array();
  for (const auto& v : r.quad.v) quad.push_back({v.x, v.y});
  ojson fields = ojson::object();
  for (const auto& [k, v] : r.fields) fields[k] = v;
  return ojson{{"image", r.image}, {"class", code(r.cls)}, {"quad", quad}, {"fields", fields}}.dump();
}

SampleRecord from_json_line(const std::string& line) {
  try {
    const auto j = nlohmann::json::parse(line);
    SampleRecord r;
    r.image = j.at("image").get<std::string>();
    const auto cls = class_from_code(j.at("class").get<int>());
    if (!cls) throw Error(ErrorKind::FormatError, "class code out of range");
    r.cls = *cls;
    const auto& q = j.at("quad");
    if (q.size() != 4) throw Error(ErrorKind::FormatError, "quad must have four vertices");
    for (int i = 0; i < 4; ++i) r.quad.v[i] = {q[i].at(0).get<double>(), q[i].at(1).get<double>()};
    for (const auto& [k, v] : j.at("fields").items()) r.fields[k] = v.get<std::string>();
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::FormatError, std::string("manifest line: ") + e.what());
  }
}

void write_manifest(const std::filesystem::path& path, const std::vector<SampleRecord>& records) {
  std::string text;
  for (const auto& r : records) text += to_json_line(r) + "\n";
  raster::write_file(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

std::vector<SampleRecord> read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::IoError, "cannot read manifest " + path.string());
  std::vector<SampleRecord> out;
  for (std::string line; std::getline(in, line);)
    if (!line.empty()) out.push_back(from_json_line(line));
  return out;
}

DatasetKind dataset_kind_from_name(std::string_view name) {
  if (name == "main") return DatasetKind::Main;
  if (name == "classifier") return DatasetKind::Classifier;
  if (name == "ocr") return DatasetKind::Ocr;
  throw Error(ErrorKind::InvalidArgument, "unknown dataset kind '" + std::string(name) + "'");
}

// ---------------------------------------------------------------------------
// Datasets

namespace {

std::string sample_stem(std::size_t i) {
  char b[16];
  std::snprintf(b, sizeof b, "%06zu", i);
  return b;
}

void write_bytes(const std::filesystem::path& p, const std::vector<std::uint8_t>& bytes) { raster::write_file(p, bytes); }

Quad full_frame(int w, int h) { return Quad::rect(0, 0, w, h); }

}  // namespace

std::vector<SampleRecord> gen_dataset(DatasetKind kind, int count, std::uint64_t seed,
                                      const std::filesystem::path& out_dir, const SynthConfig& cfg) {
  if (count < 1) throw Error(ErrorKind::InvalidArgument, "count must be >= 1");
  cfg.degradation.validate();
  std::error_code ec;
  std::filesystem::create_directories(out_dir / "images", ec);
  if (ec) throw Error(ErrorKind::IoError, "cannot create " + (out_dir / "images").string() + ": " + ec.message());

  std::vector<std::vector<SampleRecord>> per_sample(static_cast<std::size_t>(count));
  parallel_for(per_sample.size(), cfg.threads, [&](std::size_t i) {
    Rng rng = derive_rng(seed, i);
    const DocumentClass cls = kAllClasses[i % kNumClasses];
    const auto& lay = layout::find_layout(cfg.layouts, cls);
    const FieldValues values = kind == DatasetKind::Main ? person_fields(lay, gen_person(rng, cfg.lists, cls), rng)
                                                          : random_fields(lay, cfg.lists, rng);
    const Rendered doc = render_document(lay, values, rng);
    const Image bg = make_background(cfg.photo_width, cfg.photo_height, rng);
    const Composite comp = composite_on_background(doc.image, bg, rng, cfg.placement);
    const Degraded deg = degrade_pipeline(comp.photo, comp.quad, cfg.degradation, rng);
    const std::string stem = sample_stem(i);
    if (cfg.debug_png) raster::write_image(out_dir / "images" / (stem + "_clean.png"), comp.photo);

    auto& out = per_sample[i];
    switch (kind) {
      case DatasetKind::Main: {
        const std::string rel = "images/" + stem + ".jpg";
        write_bytes(out_dir / rel, deg.jpeg);
        out.push_back({rel, cls, deg.quad, doc.truth});
        break;
      }
      case DatasetKind::Classifier: {
        // Light warp: every vertex coordinate jittered by up to 2% of l.
        const double j = cfg.classifier_jitter * deg.quad.shortest_side();
        Quad q = deg.quad;
        do {
          q = deg.quad;
          for (auto& v : q.v) v = {v.x + uniform(rng, -j, j), v.y + uniform(rng, -j, j)};
        } while (!q.valid());
        const Image sq = raster::warp_perspective(deg.image, q, cfg.classifier_size, cfg.classifier_size);
        const std::string rel = "images/" + stem + ".png";
        raster::write_image(out_dir / rel, sq);
        out.push_back({rel, cls, full_frame(sq.width(), sq.height()), doc.truth});
        break;
      }
      case DatasetKind::Ocr: {
        const Image flat = extract::rectify(deg.image, deg.quad, lay, cfg.rectified_width);
        for (const auto& line : extract::extract_field_lines(flat, lay)) {
          const std::string rel = "images/" + stem + "_" + line.name + ".png";
          raster::write_image(out_dir / rel, line.line);
          out.push_back({rel, cls, full_frame(line.line.width(), line.line.height()),
                         {{line.name, doc.truth.at(line.name)}}});
        }
        break;
      }
    }
  });
  std::vector<SampleRecord> records;
  for (auto& v : per_sample)
    for (auto& r : v) records.push_back(std::move(r));
  write_manifest(out_dir / kManifestName, records);
  return records;
}

}  // namespace idread::synth
