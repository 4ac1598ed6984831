#include "ucrs/data/io.hpp"

#include <fstream>

#include "util/text.hpp"

namespace ucrs::data {

namespace {

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return in;
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

RawInteraction parse_interaction(const std::vector<std::string_view>& cols,
                                 const std::string& path, std::size_t line) {
  if (cols.size() != 4) {
    throw ParseError(path, line, "expected 4 columns, got " + std::to_string(cols.size()));
  }
  if (cols[0].empty() || cols[1].empty()) throw ParseError(path, line, "empty id");
  const auto rating = detail::parse_number<int>(cols[2]);
  if (!rating) throw ParseError(path, line, "rating is not an integer");
  if (*rating < 1 || *rating > 5) {
    throw ParseError(path, line, "rating " + std::to_string(*rating) + " outside [1,5]");
  }
  const auto ts = detail::parse_number<std::int64_t>(cols[3]);
  if (!ts) throw ParseError(path, line, "timestamp is not an integer");
  if (*ts < 0) throw ParseError(path, line, "negative timestamp");
  return {std::string(cols[0]), std::string(cols[1]), *rating, *ts};
}

std::string latin1_to_utf8(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (unsigned char c : s) {
    if (c < 0x80) {
      out.push_back(static_cast<char>(c));
    } else {
      out.push_back(static_cast<char>(0xC0 | (c >> 6)));
      out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
    }
  }
  return out;
}

}  // namespace

std::vector<RawInteraction> load_interactions(const std::filesystem::path& path) {
  auto in = open_input(path);
  std::vector<RawInteraction> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto text = detail::trim_eol(line);
    if (text.empty()) continue;
    rows.push_back(parse_interaction(detail::split(text, "\t"), path.string(), lineno));
  }
  return rows;
}

std::vector<UserFeatureRow> load_user_features(const std::filesystem::path& path) {
  auto in = open_input(path);
  std::vector<UserFeatureRow> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto text = detail::trim_eol(line);
    if (text.empty()) continue;
    const auto cols = detail::split(text, "\t");
    if (cols[0].empty()) throw ParseError(path.string(), lineno, "empty user id");
    UserFeatureRow row{std::string(cols[0]), {}};
    for (std::size_t c = 1; c < cols.size(); ++c) {
      const auto eq = cols[c].find('=');
      if (eq == std::string_view::npos || eq == 0 || eq + 1 == cols[c].size()) {
        throw ParseError(path.string(), lineno, "expected attr=value, got '" +
                                                    std::string(cols[c]) + "'");
      }
      row.attributes.emplace_back(std::string(cols[c].substr(0, eq)),
                                  std::string(cols[c].substr(eq + 1)));
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<ItemCategoryRow> load_item_categories(const std::filesystem::path& path) {
  auto in = open_input(path);
  std::vector<ItemCategoryRow> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto text = detail::trim_eol(line);
    if (text.empty()) continue;
    const auto cols = detail::split(text, "\t");
    if (cols.size() < 2 || cols.size() > 3) {
      throw ParseError(path.string(), lineno, "expected item_id \\t categories [\\t name]");
    }
    ItemCategoryRow row{std::string(cols[0]), {}, cols.size() == 3 ? std::string(cols[2]) : ""};
    for (auto c : detail::split(cols[1], "|")) {
      if (c.empty()) throw ParseError(path.string(), lineno, "empty category name");
      row.categories.emplace_back(c);
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

RawCorpus load_movielens_1m(const std::filesystem::path& dir) {
  RawCorpus corpus;
  std::string line;

  {
    const auto path = dir / "ratings.dat";
    auto in = open_input(path);
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      const auto text = detail::trim_eol(line);
      if (text.empty()) continue;
      corpus.interactions.push_back(
          parse_interaction(detail::split(text, "::"), path.string(), lineno));
    }
  }
  {
    const auto path = dir / "users.dat";
    auto in = open_input(path);
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      const auto text = detail::trim_eol(line);
      if (text.empty()) continue;
      const auto cols = detail::split(text, "::");
      if (cols.size() != 5) throw ParseError(path.string(), lineno, "expected 5 fields");
      corpus.user_features.push_back(
          {std::string(cols[0]),
           {{"gender", std::string(cols[1])},
            {"age", std::string(cols[2])},
            {"occupation", std::string(cols[3])}}});
    }
  }
  {
    const auto path = dir / "movies.dat";
    auto in = open_input(path);
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      const auto text = detail::trim_eol(line);
      if (text.empty()) continue;
      const auto cols = detail::split(text, "::");
      if (cols.size() != 3) throw ParseError(path.string(), lineno, "expected 3 fields");
      ItemCategoryRow row{std::string(cols[0]), {}, latin1_to_utf8(cols[1])};
      for (auto g : detail::split(cols[2], "|")) row.categories.emplace_back(g);
      corpus.item_categories.push_back(std::move(row));
    }
  }
  return corpus;
}

void apply_single_label(std::vector<ItemCategoryRow>& rows, SingleLabel mode) {
  if (mode == SingleLabel::Off) return;
  for (auto& row : rows) {
    if (row.categories.size() > 1) row.categories.resize(1);
  }
}

void write_interactions(const std::filesystem::path& path,
                        const std::vector<RawInteraction>& rows) {
  auto out = open_output(path);
  for (const auto& r : rows) {
    out << r.user_id << '\t' << r.item_id << '\t' << r.rating << '\t' << r.timestamp << '\n';
  }
}

void write_user_features(const std::filesystem::path& path,
                         const std::vector<UserFeatureRow>& rows) {
  auto out = open_output(path);
  for (const auto& r : rows) {
    out << r.user_id;
    for (const auto& [name, value] : r.attributes) out << '\t' << name << '=' << value;
    out << '\n';
  }
}

void write_item_categories(const std::filesystem::path& path,
                           const std::vector<ItemCategoryRow>& rows) {
  auto out = open_output(path);
  for (const auto& r : rows) {
    out << r.item_id << '\t' << detail::join(r.categories, "|");
    if (!r.name.empty()) out << '\t' << r.name;
    out << '\n';
  }
}

}  // namespace ucrs::data
