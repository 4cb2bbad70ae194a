#ifndef CHAI_JSONL_HPP_
#define CHAI_JSONL_HPP_

#include <nlohmann/json.hpp>

#include <functional>
#include <string>
#include <vector>

namespace chai::jsonl {

using json = nlohmann::json;

/// Reads one JSON object per non-blank line. Parse errors report the 1-based
/// line number.
std::vector<json> read(const std::string& path);

/// Calls `fn(line_number, object)` for each non-blank line.
void for_each(const std::string& path, const std::function<void(std::size_t, const json&)>& fn);

/// Serializes records one per line, each terminated by '\n'.
std::string dump(const std::vector<json>& records);

void write(const std::string& path, const std::vector<json>& records);

}  // namespace chai::jsonl

#endif  // CHAI_JSONL_HPP_
