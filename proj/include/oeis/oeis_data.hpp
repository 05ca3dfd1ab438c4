#pragma once

#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"

#include "oeis/dsl.hpp"
#include "oeis/integer.hpp"
#include "oeis/transpiler.hpp"
#include "oeis/union_find.hpp"

namespace oeis {

struct SequenceEntry {
  std::string tag;
  std::int64_t offset = 0;
  std::vector<Integer> values;  // values[k] is a(offset + k)

  std::optional<Integer> at(const Integer& index) const;
};

struct DataWarning {
  enum class Kind { MalformedLine, IndexGap, DuplicateTag };
  Kind kind;
  std::size_t line_no;
  std::string message;
};

class DataError : public std::runtime_error {
 public:
  enum class Code { EmptyInput, MalformedLine, EmptyPairs, DuplicateName, UnknownName, InvalidRecord };
  DataError(Code c, const std::string& what, std::size_t line = 0) : std::runtime_error(what), code(c), line_no(line) {}
  Code code;
  std::size_t line_no;
};

struct StrippedFile {
  std::map<std::string, SequenceEntry> entries;
  std::vector<DataWarning> warnings;
};

// `A000079 ,1,2,4,8,` per line; `#` lines skipped; offsets default to 0.
StrippedFile parse_stripped(std::istream& in);
StrippedFile parse_stripped(std::string_view text);
std::string render_stripped(const std::map<std::string, SequenceEntry>& entries);

using IndexedValue = std::pair<Integer, Integer>;

struct BFile {
  std::vector<IndexedValue> pairs;
  std::vector<DataWarning> warnings;
};

// `<index> <value>` per line; `#` comments and blank lines skipped.
BFile parse_bfile(std::istream& in);
BFile parse_bfile(std::string_view text);

// Evenly spaced positions round(j(L-1)/(k-1)), j = 0..k-1, deduplicated.
std::vector<IndexedValue> sample_values(const std::vector<IndexedValue>& pairs, std::size_t k = 100);

// Sequence values by tag, from a stripped file plus optional b-files.
class SequenceRegistry {
 public:
  void add(SequenceEntry entry);
  // Replaces/extends the values of `tag` from b-file pairs (must be consecutive).
  void merge_bfile(const std::string& tag, const BFile& bfile);
  const SequenceEntry* find(std::string_view tag) const;
  std::size_t size() const { return entries_.size(); }

  // Loads `stripped` if nonempty, then every b<digits>.txt in `bfile_dir`.
  static SequenceRegistry load(const std::string& stripped, const std::string& bfile_dir);

 private:
  std::map<std::string, SequenceEntry, std::less<>> entries_;
};

struct DefinitionRecord {
  std::string name;
  std::string tag;
  Expr source;
  LeanSource lean;
  std::int64_t offset = 0;
  std::optional<std::int64_t> max_index;
  std::set<std::int64_t> proved_indices;
};

struct EquivalenceRecord {
  std::string left;
  std::string right;
};

struct InfoRecord {
  std::string tag;
  std::string name;
  std::int64_t offset = 0;
  bool computable = true;
  std::size_t proved_count = 0;
  std::size_t equivalence_class = 0;
  std::vector<std::string> theorem_names;

  friend bool operator==(const InfoRecord&, const InfoRecord&) = default;
};

// Formalized definitions partitioned into equivalence classes.
class DefinitionRegistry {
 public:
  void register_definition(DefinitionRecord defn);
  // Returns true when two classes merged.
  bool register_equivalence(const EquivalenceRecord& rec);

  const DefinitionRecord* find(std::string_view name) const;
  std::size_t size() const { return records_.size(); }
  std::size_t class_count() const { return uf_.classes(); }
  bool equivalent(std::string_view a, std::string_view b);
  const std::vector<EquivalenceRecord>& equivalences() const { return equivalences_; }

  // Sorted by (tag, name); class ids numbered by first appearance in that order.
  std::vector<InfoRecord> info();

 private:
  std::vector<DefinitionRecord> records_;
  std::map<std::string, std::size_t, std::less<>> by_name_;
  std::vector<EquivalenceRecord> equivalences_;
  UnionFind uf_;
};

nlohmann::json export_info_json(DefinitionRegistry& registry);
std::vector<InfoRecord> parse_info_json(const nlohmann::json& doc);

}  // namespace oeis
