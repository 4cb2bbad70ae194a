#include "chai/jsonl.hpp"

#include <fstream>

#include "chai/text.hpp"

namespace chai::jsonl {

void for_each(const std::string& path, const std::function<void(std::size_t, const json&)>& fn) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read file: " + path);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (text::is_blank(line)) continue;
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error& e) {
      throw Error(path + ":" + std::to_string(line_no) + ": malformed JSON: " + e.what());
    }
    fn(line_no, obj);
  }
}

std::vector<json> read(const std::string& path) {
  std::vector<json> out;
  for_each(path, [&](std::size_t, const json& obj) { out.push_back(obj); });
  return out;
}

std::string dump(const std::vector<json>& records) {
  std::string out;
  for (const auto& r : records) {
    out += r.dump();
    out += '\n';
  }
  return out;
}

void write(const std::string& path, const std::vector<json>& records) {
  text::write_file(path, dump(records));
}

}  // namespace chai::jsonl
