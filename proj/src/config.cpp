#include "mcseg/config.hpp"

#include "mcseg/error.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>

namespace mcseg {
namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::string format_double(double v) {
  char buf[64];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, end);
}

template <typename T>
T parse_number(std::string_view key, std::string_view text) {
  T value{};
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (text.empty() || ec != std::errc() || ptr != text.data() + text.size()) {
    throw ConfigError("config key '" + std::string(key) + "': cannot parse '" +
                      std::string(text) + "'");
  }
  if constexpr (std::is_floating_point_v<T>) {
    if (!std::isfinite(value)) {
      throw ConfigError("config key '" + std::string(key) + "': value must be finite");
    }
  }
  return value;
}

struct Field {
  std::string key;
  std::function<void(Config&, std::string_view)> set;
  std::function<std::optional<std::string>(const Config&)> get;
};

template <typename T>
Field field(std::string key, T Config::*member, std::function<bool(T)> ok, const char* range) {
  Field f;
  f.key = key;
  f.set = [key, member, ok, range](Config& c, std::string_view text) {
    const T v = parse_number<T>(key, text);
    if (!ok(v)) {
      throw ConfigError("config key '" + key + "': value " + std::string(text) +
                        " outside " + range);
    }
    c.*member = v;
  };
  f.get = [member](const Config& c) -> std::optional<std::string> {
    if constexpr (std::is_floating_point_v<T>) {
      return format_double(c.*member);
    } else {
      return std::to_string(c.*member);
    }
  };
  return f;
}

const std::vector<Field>& fields() {
  static const std::vector<Field> table = [] {
    auto positive = [](double v) { return v > 0.0; };
    auto non_negative = [](double v) { return v >= 0.0; };
    auto any = [](double) { return true; };
    std::vector<Field> t;
    t.push_back(field<double>("plane.dist_thresh", &Config::plane_dist_thresh, positive, "(0, inf)"));
    t.push_back(field<double>("plane.min_inlier_frac", &Config::plane_min_inlier_frac,
                              [](double v) { return v >= 0.0 && v <= 1.0; }, "[0, 1]"));
    t.push_back(field<int>("plane.max_planes", &Config::plane_max_planes,
                           [](int v) { return v >= 0; }, "[0, inf)"));
    t.push_back(field<int>("plane.iters", &Config::plane_iters, [](int v) { return v >= 1; },
                           "[1, inf)"));
    t.push_back(field<double>("fps.ratio", &Config::fps_ratio,
                              [](double v) { return v > 0.0 && v <= 1.0; }, "(0, 1]"));
    t.push_back(field<std::size_t>("normals.k", &Config::normals_k,
                                   [](std::size_t v) { return v >= 3; }, "[3, inf)"));
    t.push_back(field<std::size_t>("graph.k1", &Config::graph_k1,
                                   [](std::size_t v) { return v >= 1; }, "[1, inf)"));
    {
      Field f;
      f.key = "affinity.alpha_emb";
      f.set = [](Config& c, std::string_view text) {
        const double v = parse_number<double>("affinity.alpha_emb", text);
        if (v < 0.0) throw ConfigError("config key 'affinity.alpha_emb': value must be >= 0");
        c.alpha_emb = v;
      };
      f.get = [](const Config& c) -> std::optional<std::string> {
        if (!c.alpha_emb) return std::nullopt;
        return format_double(*c.alpha_emb);
      };
      t.push_back(std::move(f));
    }
    t.push_back(field<double>("affinity.alpha_norm", &Config::alpha_norm, non_negative, "[0, inf)"));
    t.push_back(field<double>("affinity.alpha_xyz", &Config::alpha_xyz, non_negative, "[0, inf)"));
    t.push_back(field<double>("affinity.alpha_rgb", &Config::alpha_rgb, non_negative, "[0, inf)"));
    t.push_back(field<double>("sigma.low", &Config::sigma_low, any, "finite reals"));
    t.push_back(field<double>("sigma.high", &Config::sigma_high, any, "finite reals"));
    t.push_back(field<std::size_t>("labels.k2", &Config::labels_k2,
                                   [](std::size_t v) { return v >= 1; }, "[1, inf)"));
    t.push_back(field<double>("consolidate.cover_frac", &Config::consolidate_cover_frac, positive,
                              "(0, inf)"));
    t.push_back(field<double>("consolidate.aff_threshold", &Config::consolidate_aff_threshold, any,
                              "finite reals"));
    t.push_back(field<double>("loss.lambda_dice", &Config::loss_lambda_dice, non_negative, "[0, inf)"));
    t.push_back(field<double>("loss.lambda_bce", &Config::loss_lambda_bce, non_negative, "[0, inf)"));
    t.push_back(field<double>("loss.lambda_mean", &Config::loss_lambda_mean, non_negative, "[0, inf)"));
    t.push_back(field<double>("loss.lambda_box", &Config::loss_lambda_box, non_negative, "[0, inf)"));
    t.push_back(field<double>("loss.beta", &Config::loss_beta, positive, "(0, inf)"));
    t.push_back(field<std::uint64_t>("seed", &Config::seed, [](std::uint64_t) { return true; },
                                     "uint64"));
    return t;
  }();
  return table;
}

}  // namespace

const std::vector<std::string>& Config::keys() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> k;
    for (const auto& f : fields()) k.push_back(f.key);
    return k;
  }();
  return names;
}

void Config::set(std::string_view key, std::string_view value) {
  for (const auto& f : fields()) {
    if (f.key == key) {
      f.set(*this, trim(value));
      return;
    }
  }
  throw ConfigError("unknown config key '" + std::string(key) + "'");
}

void Config::merge_text(std::string_view text, std::string_view origin) {
  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (pos <= text.size()) {
    auto eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    ++line_no;
    std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError(std::string(origin) + ":" + std::to_string(line_no) +
                        ": expected 'section.key = value'");
    }
    try {
      set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    } catch (const ConfigError& e) {
      throw ConfigError(std::string(origin) + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
}

void Config::merge_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  merge_text(ss.str(), path.string());
}

std::vector<std::pair<std::string, std::string>> Config::entries() const {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& f : fields()) {
    if (auto v = f.get(*this)) out.emplace_back(f.key, std::move(*v));
  }
  return out;
}

std::string Config::to_text() const {
  std::string text;
  for (const auto& [k, v] : entries()) text += k + " = " + v + "\n";
  return text;
}

affinity::Weights Config::affinity_weights(bool has_features) const {
  return {alpha_emb.value_or(has_features ? 1.0 : 0.0), alpha_norm, alpha_xyz, alpha_rgb};
}

preprocess::PlaneParams Config::plane_params() const {
  return {plane_dist_thresh, plane_min_inlier_frac, plane_max_planes, plane_iters, seed};
}

labels::ConsolidateParams Config::consolidate_params() const {
  return {consolidate_aff_threshold, consolidate_cover_frac};
}

losses::LossWeights Config::loss_weights() const {
  return {loss_lambda_dice, loss_lambda_bce, loss_lambda_mean, loss_lambda_box};
}

}  // namespace mcseg
