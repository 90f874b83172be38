#include <algorithm>
#include <atomic>
#include <cctype>
#include <charconv>
#include <cmath>
#include <sstream>
#include <thread>

#include "swb/error.h"
#include "swb/match.h"

namespace swb {
namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

double parse_double(const std::string& key, const std::string& value) {
  double out = 0.0;
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size() || !std::isfinite(out)) {
    throw Error(ErrorKind::kConfig, "config key '" + key + "': '" + value + "' is not a number");
  }
  return out;
}

std::size_t parse_size(const std::string& key, const std::string& value) {
  std::size_t out = 0;
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size()) {
    throw Error(ErrorKind::kConfig,
                "config key '" + key + "': '" + value + "' is not a non-negative integer");
  }
  return out;
}

std::string format_number(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

MatchConfig parse_match_config(std::string_view text) {
  MatchConfig c;
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string body = trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorKind::kConfig,
                  "config line " + std::to_string(line_no) + ": expected key = value");
    }
    const std::string key = trim(std::string_view(body).substr(0, eq));
    const std::string value = trim(std::string_view(body).substr(eq + 1));
    if (key == "voters") {
      c.voters.clear();
      std::stringstream parts(value);
      std::string item;
      while (std::getline(parts, item, ',')) {
        const std::string name = trim(item);
        if (name.empty()) continue;
        const VoterId v = parse_voter(name);
        if (std::find(c.voters.begin(), c.voters.end(), v) == c.voters.end()) {
          c.voters.push_back(v);
        }
      }
      if (c.voters.empty()) throw Error(ErrorKind::kConfig, "config: voters list is empty");
    } else if (key == "k") {
      c.saturation = parse_double(key, value);
      if (c.saturation <= 0.0) throw Error(ErrorKind::kConfig, "config: k must be > 0");
    } else if (key == "pair_budget") {
      c.pair_budget = parse_size(key, value);
    } else if (key == "threshold") {
      c.threshold = parse_double(key, value);
      if (c.threshold <= -1.0 || c.threshold >= 1.0) {
        throw Error(ErrorKind::kConfig, "config: threshold must lie in (-1, 1)");
      }
    } else if (key == "threads") {
      c.threads = static_cast<unsigned>(parse_size(key, value));
    } else if (key == "stopwords") {
      c.stopwords_path = value;
    } else {
      throw Error(ErrorKind::kConfig, "config line " + std::to_string(line_no) +
                                          ": unknown key '" + key + "'");
    }
  }
  return c;
}

std::string format_match_config(const MatchConfig& config) {
  std::string voters;
  for (VoterId v : config.voters) {
    if (!voters.empty()) voters += ",";
    voters += to_string(v);
  }
  std::string out = "voters = " + voters + "\n";
  out += "k = " + format_number(config.saturation) + "\n";
  out += "pair_budget = " + std::to_string(config.pair_budget) + "\n";
  out += "threshold = " + format_number(config.threshold) + "\n";
  out += "threads = " + std::to_string(config.threads) + "\n";
  if (!config.stopwords_path.empty()) out += "stopwords = " + config.stopwords_path + "\n";
  return out;
}

void sort_links(std::vector<Link>& links) {
  std::sort(links.begin(), links.end(), [](const Link& a, const Link& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.left != b.left) return a.left < b.left;
    return a.right < b.right;
  });
}

std::vector<VoterScore> MatchMatrix::voter_scores(ElementIndex i, ElementIndex j) const {
  std::vector<VoterScore> out;
  out.reserve(config_.voters.size());
  for (VoterId v : config_.voters) {
    out.push_back(vote(v, (*left_features_)[i], (*right_features_)[j], config_.saturation));
  }
  return out;
}

MatchLink MatchMatrix::explain(ElementIndex i, ElementIndex j) const {
  MatchLink link;
  link.left_id = left_->element(i).id;
  link.right_id = right_->element(j).id;
  link.voter_scores = voter_scores(i, j);
  link.score = score(i, j);
  return link;
}

std::vector<Link> MatchMatrix::links_in_range(double lo, double hi) const {
  std::vector<Link> out;
  for (ElementIndex i = 0; i < rows_; ++i) {
    const auto r = row(i);
    for (ElementIndex j = 0; j < cols_; ++j) {
      if (r[j] >= lo && r[j] <= hi) out.push_back({i, j, r[j]});
    }
  }
  sort_links(out);
  return out;
}

MatchMatrix match(std::shared_ptr<const Schema> left, std::shared_ptr<const Schema> right,
                  const MatchConfig& config, const Analyzer& analyzer) {
  if (!left || !right) throw Error(ErrorKind::kValidation, "match() requires two schemata");
  if (config.voters.empty()) throw Error(ErrorKind::kConfig, "no voters enabled");
  if (config.saturation <= 0.0) throw Error(ErrorKind::kConfig, "k must be > 0");
  const std::size_t rows = left->element_count();
  const std::size_t cols = right->element_count();
  if (cols != 0 && rows > config.pair_budget / cols) {
    throw Error(ErrorKind::kResource,
                std::to_string(rows) + " x " + std::to_string(cols) +
                    " pairs exceed the configured pair budget of " +
                    std::to_string(config.pair_budget));
  }

  MatchMatrix m;
  m.left_ = std::move(left);
  m.right_ = std::move(right);
  m.config_ = config;
  m.rows_ = rows;
  m.cols_ = cols;
  m.left_features_ =
      std::make_shared<const std::vector<ElementFeatures>>(extract_features(*m.left_, analyzer));
  m.right_features_ =
      std::make_shared<const std::vector<ElementFeatures>>(extract_features(*m.right_, analyzer));
  m.scores_.assign(rows * cols, 0.0);

  const auto& lf = *m.left_features_;
  const auto& rf = *m.right_features_;
  const auto& voters = config.voters;
  const double k = config.saturation;

  // Each row is written by exactly one worker, so the result does not depend
  // on scheduling.
  std::atomic<std::size_t> next_row{0};
  auto worker = [&] {
    std::vector<double> conf(voters.size());
    while (true) {
      const std::size_t i = next_row.fetch_add(1, std::memory_order_relaxed);
      if (i >= rows) return;
      double* out = m.scores_.data() + i * cols;
      for (std::size_t j = 0; j < cols; ++j) {
        for (std::size_t v = 0; v < voters.size(); ++v) {
          conf[v] = vote(voters[v], lf[i], rf[j], k).confidence;
        }
        out[j] = merge_confidences(conf);
      }
    }
  };

  unsigned threads = config.threads != 0 ? config.threads : std::thread::hardware_concurrency();
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(rows, 1))));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  return m;
}

}  // namespace swb
