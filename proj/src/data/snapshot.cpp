#include "ucrs/data/snapshot.hpp"

#include <fstream>

#include "util/text.hpp"

namespace ucrs::data {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void write_split(const fs::path& path, const std::vector<Interaction>& rows) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  for (const auto& x : rows) out << x.user << '\t' << x.item << '\t' << x.timestamp << '\n';
}

std::vector<std::string> read_lines(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    const auto text = detail::trim_eol(line);
    if (!text.empty()) lines.emplace_back(text);
  }
  return lines;
}

template <typename T>
T parse_field(std::string_view s, const fs::path& path, std::size_t line) {
  const auto v = detail::parse_number<T>(s);
  if (!v) throw ParseError(path.string(), line, "bad number '" + std::string(s) + "'");
  return *v;
}

std::vector<Interaction> read_split(const fs::path& path) {
  std::vector<Interaction> rows;
  const auto lines = read_lines(path);
  for (std::size_t l = 0; l < lines.size(); ++l) {
    const auto cols = detail::split(lines[l], "\t");
    if (cols.size() != 3) throw ParseError(path.string(), l + 1, "expected 3 columns");
    rows.push_back({parse_field<UserIndex>(cols[0], path, l + 1),
                    parse_field<ItemIndex>(cols[1], path, l + 1),
                    parse_field<std::int64_t>(cols[2], path, l + 1), 1});
  }
  return rows;
}

}  // namespace

void write_dataset(const fs::path& dir, const Dataset& dataset, const json& extra) {
  fs::create_directories(dir);
  json manifest = extra;
  manifest["format"] = "ucrs-dataset";
  manifest["version"] = 1;
  manifest["num_users"] = dataset.num_users();
  manifest["num_items"] = dataset.num_items();
  manifest["N"] = dataset.num_user_features();
  manifest["M"] = dataset.num_categories();
  manifest["splits"] = {{"train", dataset.train.size()},
                        {"valid", dataset.valid.size()},
                        {"test", dataset.test.size()}};
  json groups = json::array();
  for (const auto& g : dataset.attribute_groups) {
    groups.push_back({{"name", g.name}, {"values", g.values}, {"first_feature", g.first_feature}});
  }
  manifest["attribute_groups"] = groups;
  manifest["categories"] = dataset.category_names;
  {
    std::ofstream out(dir / "manifest.json", std::ios::trunc);
    if (!out) throw IoError("cannot write manifest in " + dir.string());
    out << manifest.dump(2) << '\n';
  }
  {
    std::ofstream out(dir / "users.tsv", std::ios::binary | std::ios::trunc);
    for (std::uint32_t u = 0; u < dataset.num_users(); ++u) {
      out << dataset.user_ids.name(u) << '\t' << detail::join(dataset.users[u].features, ",")
          << '\n';
    }
  }
  {
    std::ofstream out(dir / "items.tsv", std::ios::binary | std::ios::trunc);
    for (std::uint32_t i = 0; i < dataset.num_items(); ++i) {
      out << dataset.item_ids.name(i) << '\t' << detail::join(dataset.items[i].categories, "|")
          << '\t' << dataset.items[i].name << '\n';
    }
  }
  write_split(dir / "train.tsv", dataset.train);
  write_split(dir / "valid.tsv", dataset.valid);
  write_split(dir / "test.tsv", dataset.test);
}

json read_manifest(const fs::path& dir) {
  std::ifstream in(dir / "manifest.json");
  if (!in) throw IoError("cannot open " + (dir / "manifest.json").string());
  json manifest;
  try {
    in >> manifest;
  } catch (const json::exception& e) {
    throw Error("invalid manifest.json: " + std::string(e.what()));
  }
  if (manifest.value("format", "") != "ucrs-dataset") {
    throw Error(dir.string() + " is not a ucrs dataset directory");
  }
  return manifest;
}

Dataset read_dataset(const fs::path& dir) {
  const auto manifest = read_manifest(dir);
  Dataset ds;
  for (const auto& g : manifest.at("attribute_groups")) {
    ds.attribute_groups.push_back({g.at("name").get<std::string>(),
                                   g.at("values").get<std::vector<std::string>>(),
                                   g.at("first_feature").get<FeatureIndex>()});
  }
  ds.category_names = manifest.at("categories").get<std::vector<std::string>>();

  std::vector<std::string> user_names;
  {
    const auto path = dir / "users.tsv";
    const auto lines = read_lines(path);
    for (std::size_t l = 0; l < lines.size(); ++l) {
      const auto cols = detail::split(lines[l], "\t");
      user_names.emplace_back(cols[0]);
      UserProfile profile;
      if (cols.size() > 1 && !cols[1].empty()) {
        for (auto f : detail::split(cols[1], ",")) {
          profile.features.push_back(parse_field<FeatureIndex>(f, path, l + 1));
        }
      }
      ds.users.push_back(std::move(profile));
    }
  }
  std::vector<std::string> item_names;
  {
    const auto path = dir / "items.tsv";
    const auto lines = read_lines(path);
    for (std::size_t l = 0; l < lines.size(); ++l) {
      const auto cols = detail::split(lines[l], "\t");
      if (cols.size() < 2) throw ParseError(path.string(), l + 1, "expected item row");
      item_names.emplace_back(cols[0]);
      ItemProfile profile;
      for (auto c : detail::split(cols[1], "|")) {
        profile.categories.push_back(parse_field<CategoryIndex>(c, path, l + 1));
      }
      profile.name = cols.size() > 2 ? std::string(cols[2]) : std::string(cols[0]);
      ds.items.push_back(std::move(profile));
    }
  }
  ds.user_ids = Vocabulary(std::move(user_names));
  ds.item_ids = Vocabulary(std::move(item_names));
  ds.train = read_split(dir / "train.tsv");
  ds.valid = read_split(dir / "valid.tsv");
  ds.test = read_split(dir / "test.tsv");
  if (ds.num_users() != manifest.at("num_users").get<std::size_t>() ||
      ds.num_items() != manifest.at("num_items").get<std::size_t>()) {
    throw Error("dataset files disagree with manifest counts in " + dir.string());
  }
  ds.index_histories();
  ds.validate();
  return ds;
}

}  // namespace ucrs::data
