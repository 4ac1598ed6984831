#include "ucrs/detect/slate_io.hpp"

#include <fstream>

#include "util/text.hpp"

namespace ucrs::detect {

void write_slates(const std::filesystem::path& path, const data::Dataset& ds,
                  std::span<const Slate> slates) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  for (const auto& s : slates) {
    out << ds.user_ids.name(s.user) << '\t';
    for (std::size_t j = 0; j < s.items.size(); ++j) {
      out << (j ? "," : "") << ds.item_ids.name(s.items[j]);
    }
    out << '\t' << s.provenance;
    if (s.short_list) out << "\tshort";
    out << '\n';
  }
  if (!out) throw IoError("write failed for " + path.string());
}

std::vector<Slate> read_slates(const std::filesystem::path& path, const data::Dataset& ds) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<Slate> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    const auto text = detail::trim_eol(line);
    if (text.empty()) continue;
    const auto cols = detail::split(text, "\t");
    if (cols.size() < 3 || cols.size() > 4 || (cols.size() == 4 && cols[3] != "short")) {
      throw ParseError(path.string(), n, "expected user, items, provenance [, short]");
    }
    Slate s;
    const auto user = ds.user_ids.find(cols[0]);
    if (!user) throw ParseError(path.string(), n, "unknown user '" + std::string(cols[0]) + "'");
    s.user = *user;
    if (!cols[1].empty()) {
      for (auto id : detail::split(cols[1], ",")) {
        const auto item = ds.item_ids.find(id);
        if (!item) throw ParseError(path.string(), n, "unknown item '" + std::string(id) + "'");
        s.items.push_back(*item);
      }
    }
    s.provenance = std::string(cols[2]);
    s.short_list = cols.size() == 4;
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace ucrs::detect
