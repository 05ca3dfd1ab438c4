#include "oeis/oeis_data.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace oeis {

std::optional<Integer> SequenceEntry::at(const Integer& index) const {
  Integer pos = index - Integer(offset);
  if (pos.sign() < 0) return std::nullopt;
  auto p = pos.to_int64();
  if (!p || static_cast<std::uint64_t>(*p) >= values.size()) return std::nullopt;
  return values[static_cast<std::size_t>(*p)];
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::optional<SequenceEntry> parse_stripped_line(std::string_view line) {
  auto space = line.find_first_of(" \t");
  if (space == std::string_view::npos) return std::nullopt;
  std::string tag(line.substr(0, space));
  if (!is_oeis_tag(tag)) return std::nullopt;
  std::string_view rest = trim(line.substr(space));
  if (rest.empty() || rest.front() != ',') return std::nullopt;
  rest.remove_prefix(1);
  if (!rest.empty() && rest.back() == ',') rest.remove_suffix(1);
  SequenceEntry e{tag, 0, {}};
  while (!rest.empty()) {
    auto comma = rest.find(',');
    auto v = Integer::from_string(trim(rest.substr(0, comma)));
    if (!v) return std::nullopt;
    e.values.push_back(*v);
    if (comma == std::string_view::npos) break;
    rest.remove_prefix(comma + 1);
  }
  if (e.values.empty()) return std::nullopt;
  return e;
}

}  // namespace

StrippedFile parse_stripped(std::istream& in) {
  StrippedFile out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view v = trim(line);
    if (v.empty() || v.front() == '#') continue;
    auto entry = parse_stripped_line(v);
    if (!entry) {
      out.warnings.push_back({DataWarning::Kind::MalformedLine, line_no, "malformed stripped line"});
      continue;
    }
    std::string tag = entry->tag;
    if (!out.entries.emplace(tag, std::move(*entry)).second) {
      out.warnings.push_back({DataWarning::Kind::DuplicateTag, line_no, "duplicate tag " + tag});
    }
  }
  if (out.entries.empty()) throw DataError(DataError::Code::EmptyInput, "no valid sequence lines");
  return out;
}

StrippedFile parse_stripped(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse_stripped(in);
}

std::string render_stripped(const std::map<std::string, SequenceEntry>& entries) {
  std::string out;
  for (const auto& [tag, e] : entries) {
    out += tag + " ,";
    for (const auto& v : e.values) out += v.to_string() + ",";
    out += "\n";
  }
  return out;
}

BFile parse_bfile(std::istream& in) {
  BFile out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view v = trim(line);
    if (v.empty() || v.front() == '#') continue;
    std::istringstream fields{std::string(v)};
    std::string a, b, extra;
    fields >> a >> b;
    auto idx = Integer::from_string(a);
    auto val = Integer::from_string(b);
    if (!idx || !val || (fields >> extra)) {
      throw DataError(DataError::Code::MalformedLine, "malformed b-file line " + std::to_string(line_no), line_no);
    }
    if (!out.pairs.empty() && *idx != out.pairs.back().first + Integer(1)) {
      out.warnings.push_back({DataWarning::Kind::IndexGap, line_no,
                              "index " + idx->to_string() + " does not follow " + out.pairs.back().first.to_string()});
    }
    out.pairs.emplace_back(*idx, *val);
  }
  return out;
}

BFile parse_bfile(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse_bfile(in);
}

std::vector<IndexedValue> sample_values(const std::vector<IndexedValue>& pairs, std::size_t k) {
  if (pairs.empty()) throw DataError(DataError::Code::EmptyPairs, "cannot sample from no values");
  if (k == 0) throw std::invalid_argument("sample size must be positive");
  const std::size_t len = pairs.size();
  if (len <= k) return pairs;
  if (k == 1) return {pairs.front()};
  std::vector<IndexedValue> out;
  out.reserve(k);
  std::size_t last = len;  // sentinel: no position taken yet
  for (std::size_t j = 0; j < k; ++j) {
    // round-half-up of j(L-1)/(k-1) in exact integer arithmetic
    std::size_t pos = (2 * j * (len - 1) + (k - 1)) / (2 * (k - 1));
    if (pos == last) continue;
    out.push_back(pairs[pos]);
    last = pos;
  }
  return out;
}

// ---------------------------------------------------------------------------

void SequenceRegistry::add(SequenceEntry entry) {
  std::string tag = entry.tag;
  entries_[tag] = std::move(entry);
}

void SequenceRegistry::merge_bfile(const std::string& tag, const BFile& bfile) {
  if (bfile.pairs.empty()) return;
  SequenceEntry e;
  e.tag = tag;
  auto first = bfile.pairs.front().first.to_int64();
  if (!first) return;
  e.offset = *first;
  for (std::size_t i = 0; i < bfile.pairs.size(); ++i) {
    if (i > 0 && bfile.pairs[i].first != bfile.pairs[i - 1].first + Integer(1)) break;
    e.values.push_back(bfile.pairs[i].second);
  }
  auto it = entries_.find(tag);
  if (it != entries_.end() && it->second.values.size() > e.values.size()) return;
  entries_[tag] = std::move(e);
}

const SequenceEntry* SequenceRegistry::find(std::string_view tag) const {
  auto it = entries_.find(tag);
  return it == entries_.end() ? nullptr : &it->second;
}

SequenceRegistry SequenceRegistry::load(const std::string& stripped, const std::string& bfile_dir) {
  SequenceRegistry reg;
  if (!stripped.empty()) {
    std::ifstream in(stripped);
    if (!in) throw std::runtime_error("cannot open stripped file " + stripped);
    for (auto& [tag, e] : parse_stripped(in).entries) reg.add(std::move(e));
  }
  if (!bfile_dir.empty()) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(bfile_dir)) throw std::runtime_error("not a directory: " + bfile_dir);
    std::vector<fs::path> files;
    for (const auto& de : fs::directory_iterator(bfile_dir)) files.push_back(de.path());
    std::sort(files.begin(), files.end());
    for (const auto& p : files) {
      std::string stem = p.stem().string();
      if (p.extension() != ".txt" || stem.size() < 2 || stem[0] != 'b') continue;
      std::string tag = "A" + stem.substr(1);
      if (!is_oeis_tag(tag)) continue;
      std::ifstream in(p);
      try {
        reg.merge_bfile(tag, parse_bfile(in));
      } catch (const DataError&) {
        // a dirty b-file does not invalidate the rest of the directory
      }
    }
  }
  return reg;
}

// ---------------------------------------------------------------------------

void DefinitionRegistry::register_definition(DefinitionRecord defn) {
  if (by_name_.count(defn.name) != 0) throw DataError(DataError::Code::DuplicateName, "duplicate definition " + defn.name);
  for (auto i : defn.proved_indices) {
    if (i < defn.offset || (defn.max_index && i > *defn.max_index)) {
      throw DataError(DataError::Code::InvalidRecord, "proved index " + std::to_string(i) + " outside [offset, maxIndex]");
    }
  }
  by_name_.emplace(defn.name, records_.size());
  records_.push_back(std::move(defn));
  uf_.add();
}

bool DefinitionRegistry::register_equivalence(const EquivalenceRecord& rec) {
  auto a = by_name_.find(rec.left);
  auto b = by_name_.find(rec.right);
  if (a == by_name_.end()) throw DataError(DataError::Code::UnknownName, "unknown definition " + rec.left);
  if (b == by_name_.end()) throw DataError(DataError::Code::UnknownName, "unknown definition " + rec.right);
  equivalences_.push_back(rec);
  return uf_.unite(a->second, b->second);
}

const DefinitionRecord* DefinitionRegistry::find(std::string_view name) const {
  auto it = by_name_.find(name);
  return it == by_name_.end() ? nullptr : &records_[it->second];
}

bool DefinitionRegistry::equivalent(std::string_view a, std::string_view b) {
  auto ia = by_name_.find(a);
  auto ib = by_name_.find(b);
  if (ia == by_name_.end() || ib == by_name_.end()) return false;
  return uf_.find(ia->second) == uf_.find(ib->second);
}

std::vector<InfoRecord> DefinitionRegistry::info() {
  std::vector<std::size_t> order(records_.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::tie(records_[a].tag, records_[a].name) < std::tie(records_[b].tag, records_[b].name);
  });
  std::map<std::size_t, std::size_t> class_ids;
  std::vector<InfoRecord> out;
  for (std::size_t i : order) {
    const auto& r = records_[i];
    auto root = uf_.find(i);
    auto [it, inserted] = class_ids.emplace(root, class_ids.size());
    InfoRecord info{r.tag, r.name, r.offset, true, r.proved_indices.size(), it->second, {}};
    for (auto idx : r.proved_indices) info.theorem_names.push_back(r.name + "_thm_" + std::to_string(idx));
    out.push_back(std::move(info));
  }
  return out;
}

nlohmann::json export_info_json(DefinitionRegistry& registry) {
  nlohmann::json doc = nlohmann::json::array();
  for (const auto& r : registry.info()) {
    doc.push_back({{"tag", r.tag},
                   {"name", r.name},
                   {"offset", r.offset},
                   {"computable", r.computable},
                   {"proved_count", r.proved_count},
                   {"equivalence_class", r.equivalence_class},
                   {"theorem_names", r.theorem_names}});
  }
  return doc;
}

std::vector<InfoRecord> parse_info_json(const nlohmann::json& doc) {
  if (!doc.is_array()) throw DataError(DataError::Code::InvalidRecord, "info document must be an array");
  std::vector<InfoRecord> out;
  std::size_t i = 0;
  for (const auto& j : doc) {
    InfoRecord r;
    try {
      r.tag = j.at("tag").get<std::string>();
      r.name = j.at("name").get<std::string>();
      r.offset = j.at("offset").get<std::int64_t>();
      r.computable = j.at("computable").get<bool>();
      r.proved_count = j.at("proved_count").get<std::size_t>();
      r.equivalence_class = j.at("equivalence_class").get<std::size_t>();
      r.theorem_names = j.at("theorem_names").get<std::vector<std::string>>();
    } catch (const nlohmann::json::exception& e) {
      throw DataError(DataError::Code::InvalidRecord, "info record " + std::to_string(i) + ": " + e.what());
    }
    out.push_back(std::move(r));
    ++i;
  }
  return out;
}

}  // namespace oeis
