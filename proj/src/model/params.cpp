#include "ucrs/model/params.hpp"

#include <cmath>

#include "ucrs/random.hpp"
#include "util/binfile.hpp"

namespace ucrs::model {

namespace {

constexpr char kMagic[9] = "UCRSMDL1";

bool finite(const std::vector<double>& v) {
  for (double x : v) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

}  // namespace

const char* kind_name(ModelKind kind) { return kind == ModelKind::FM ? "fm" : "nfm"; }

ModelKind parse_kind(const std::string& name) {
  if (name == "fm") return ModelKind::FM;
  if (name == "nfm") return ModelKind::NFM;
  throw InvalidArgument("unknown model kind '" + name + "' (expected fm or nfm)");
}

bool ModelParams::all_finite() const {
  return std::isfinite(bias) && finite(linear) && finite(embeddings) && finite(w1) &&
         finite(b1) && finite(w2);
}

ModelParams init_params(const FeatureLayout& layout, ModelKind kind, std::size_t dim,
                        std::size_t hidden, double init_scale, std::uint64_t seed) {
  if (dim == 0) throw InvalidArgument("embedding size must be positive");
  if (kind == ModelKind::NFM && hidden == 0) throw InvalidArgument("NFM needs a hidden width");
  ModelParams p;
  p.kind = kind;
  p.layout = layout;
  p.dim = dim;
  p.hidden = kind == ModelKind::NFM ? hidden : 0;
  p.linear.assign(layout.total(), 0.0);
  p.embeddings.resize(layout.total() * dim);
  Rng rng(seed, 0);
  for (auto& x : p.embeddings) x = rng.normal(0.0, init_scale);
  if (kind == ModelKind::NFM) {
    Rng head(seed, 1);
    const double limit = std::sqrt(6.0 / static_cast<double>(dim + hidden));
    p.w1.resize(hidden * dim);
    for (auto& x : p.w1) x = (2.0 * head.uniform() - 1.0) * limit;
    p.b1.assign(hidden, 0.0);
    p.w2.resize(hidden);
    for (auto& x : p.w2) x = head.normal(0.0, std::sqrt(1.0 / static_cast<double>(hidden)));
  }
  return p;
}

void save_params(const ModelParams& p, const std::filesystem::path& path) {
  const auto& L = p.layout;
  nlohmann::json header = {
      {"format", "ucrs-model"},
      {"version", 1},
      {"kind", kind_name(p.kind)},
      {"d", p.dim},
      {"H", p.hidden},
      {"F", L.total()},
      {"score_convention", "post_sigmoid"},
      {"roles",
       {{"user_id", {{"offset", L.offset(Role::UserId)}, {"size", L.size(Role::UserId)}}},
        {"user_attr", {{"offset", L.offset(Role::UserAttr)}, {"size", L.size(Role::UserAttr)}}},
        {"item_id", {{"offset", L.offset(Role::ItemId)}, {"size", L.size(Role::ItemId)}}},
        {"item_cat", {{"offset", L.offset(Role::ItemCat)}, {"size", L.size(Role::ItemCat)}}}}},
  };
  const double bias[1] = {p.bias};
  detail::write_checkpoint(path, kMagic, header,
                           {{"bias", bias},
                            {"linear", p.linear},
                            {"embeddings", p.embeddings},
                            {"w1", p.w1},
                            {"b1", p.b1},
                            {"w2", p.w2}});
}

ModelParams load_params(const std::filesystem::path& path) {
  const auto cp = detail::read_checkpoint(path, kMagic);
  const auto& h = cp.header;
  ModelParams p;
  try {
    p.kind = parse_kind(h.at("kind").get<std::string>());
    p.dim = h.at("d").get<std::size_t>();
    p.hidden = h.at("H").get<std::size_t>();
    const auto& roles = h.at("roles");
    p.layout = FeatureLayout(roles.at("user_id").at("size").get<std::size_t>(),
                             roles.at("user_attr").at("size").get<std::size_t>(),
                             roles.at("item_id").at("size").get<std::size_t>(),
                             roles.at("item_cat").at("size").get<std::size_t>());
    if (p.layout.total() != h.at("F").get<std::size_t>()) {
      throw ParseError(path.string(), 0, "role sizes disagree with F");
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path.string(), 0, std::string("bad model header: ") + e.what());
  }
  p.bias = cp.array("bias").at(0);
  p.linear = cp.array("linear");
  p.embeddings = cp.array("embeddings");
  p.w1 = cp.array("w1");
  p.b1 = cp.array("b1");
  p.w2 = cp.array("w2");
  const auto F = p.layout.total();
  if (p.linear.size() != F || p.embeddings.size() != F * p.dim ||
      p.w1.size() != p.hidden * p.dim || p.b1.size() != p.hidden || p.w2.size() != p.hidden) {
    throw ParseError(path.string(), 0, "array shapes disagree with header");
  }
  return p;
}

}  // namespace ucrs::model
