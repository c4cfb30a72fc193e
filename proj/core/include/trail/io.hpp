#pragma once

#include <string>
#include <vector>

namespace trail {

// 17 significant digits: round-trips IEEE doubles exactly.
std::string fmt_real(double v);

void write_text_file(const std::string& path, const std::string& contents);
std::string read_text_file(const std::string& path);

// Minimal CSV writer: header once, then rows of preformatted fields.
class CsvWriter {
public:
    CsvWriter(const std::string& path, const std::vector<std::string>& header);
    void row(const std::vector<std::string>& fields);

private:
    std::string path_;
    std::size_t n_fields_;
    std::string buffer_;

public:
    ~CsvWriter();
    CsvWriter(const CsvWriter&) = delete;
    CsvWriter& operator=(const CsvWriter&) = delete;
    void flush();
};

} // namespace trail
