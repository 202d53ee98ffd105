// SPDX-License-Identifier: Apache-2.0
#include "clab/data/folder_io.hpp"

#include <png.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <memory>
#include <sstream>

namespace clab::data {

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const
    {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

} // namespace

Vec read_png(const std::filesystem::path& path, Index& height, Index& width)
{
    FilePtr fp(std::fopen(path.c_str(), "rb"));
    require<IngestError>(fp != nullptr, "cannot open image: " + path.string());

    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    require<IngestError>(png != nullptr, "libpng init failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        throw IngestError("libpng info init failed");
    }
    std::vector<png_bytep> rows;
    std::vector<png_byte> pixels;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw IngestError("failed to decode PNG: " + path.string());
    }
    png_init_io(png, fp.get());
    png_read_info(png, info);

    // Coerce everything decodable to 8-bit RGB.
    png_set_expand(png);
    png_set_strip_16(png);
    png_set_strip_alpha(png);
    if (png_get_color_type(png, info) == PNG_COLOR_TYPE_GRAY ||
        png_get_color_type(png, info) == PNG_COLOR_TYPE_GRAY_ALPHA)
        png_set_gray_to_rgb(png);
    png_read_update_info(png, info);

    height = static_cast<Index>(png_get_image_height(png, info));
    width = static_cast<Index>(png_get_image_width(png, info));
    const png_size_t rowbytes = png_get_rowbytes(png, info);
    if (rowbytes != static_cast<png_size_t>(width * 3)) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw IngestError("PNG did not decode to 8-bit RGB: " + path.string());
    }
    pixels.resize(static_cast<std::size_t>(height) * rowbytes);
    rows.resize(static_cast<std::size_t>(height));
    for (Index y = 0; y < height; ++y)
        rows[static_cast<std::size_t>(y)] = pixels.data() + static_cast<std::size_t>(y) * rowbytes;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);

    Vec out(height * width * 3);
    for (Index i = 0; i < out.size(); ++i)
        out[i] = static_cast<Scalar>(pixels[static_cast<std::size_t>(i)]) / 255.0;
    return out;
}

void write_png(const std::filesystem::path& path, const Vec& image, Index height, Index width)
{
    require<ContractViolation>(image.size() == height * width * 3,
                               "write_png expects an H*W*3 image");
    FilePtr fp(std::fopen(path.c_str(), "wb"));
    require<IngestError>(fp != nullptr, "cannot open for writing: " + path.string());

    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    require<IngestError>(png != nullptr, "libpng init failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        throw IngestError("libpng info init failed");
    }
    std::vector<png_byte> pixels(static_cast<std::size_t>(image.size()));
    std::vector<png_bytep> rows(static_cast<std::size_t>(height));
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw IngestError("failed to encode PNG: " + path.string());
    }
    png_init_io(png, fp.get());
    png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height),
                 8, PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
                 PNG_FILTER_TYPE_DEFAULT);
    for (Index i = 0; i < image.size(); ++i) {
        const Scalar v = std::min(1.0, std::max(0.0, image[i]));
        pixels[static_cast<std::size_t>(i)] =
            static_cast<png_byte>(std::lround(v * 255.0));
    }
    for (Index y = 0; y < height; ++y)
        rows[static_cast<std::size_t>(y)] =
            pixels.data() + static_cast<std::size_t>(y * width * 3);
    png_set_rows(png, info, rows.data());
    png_write_png(png, info, PNG_TRANSFORM_IDENTITY, nullptr);
    png_destroy_write_struct(&png, &info);
}

namespace {

std::vector<std::string> split_csv_row(const std::string& line)
{
    std::vector<std::string> out;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) out.push_back(field);
    if (!line.empty() && line.back() == ',') out.push_back("");
    return out;
}

std::int64_t parse_int(const std::string& s, const std::string& context)
{
    try {
        std::size_t pos = 0;
        const long long v = std::stoll(s, &pos);
        require<IngestError>(pos == s.size(), "");
        return v;
    } catch (const std::exception&) {
        throw IngestError("not an integer (" + context + "): '" + s + "'");
    }
}

} // namespace

Dataset load_folder(const std::filesystem::path& dir, const std::filesystem::path& metadata_csv)
{
    std::ifstream csv(metadata_csv);
    require<IngestError>(csv.good(), "cannot open metadata CSV: " + metadata_csv.string());

    std::string line;
    require<IngestError>(static_cast<bool>(std::getline(csv, line)),
                         "metadata CSV is empty: " + metadata_csv.string());
    if (!line.empty() && line.back() == '\r') line.pop_back();
    require<IngestError>(line == "path,label,location_id,timestamp",
                         "metadata CSV header must be exactly "
                         "'path,label,location_id,timestamp' in " + metadata_csv.string());

    struct Row {
        std::filesystem::path file;
        int label;
        std::string location;
        std::int64_t timestamp;
    };
    std::vector<Row> rows;
    int line_no = 1;
    while (std::getline(csv, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto fields = split_csv_row(line);
        require<IngestError>(fields.size() == 4, "row " + std::to_string(line_no) +
                                                     ": expected 4 fields, got " +
                                                     std::to_string(fields.size()));
        Row r;
        r.file = dir / fields[0];
        r.label = static_cast<int>(
            parse_int(fields[1], "label, row " + std::to_string(line_no)));
        require<IngestError>(r.label >= 0,
                             "row " + std::to_string(line_no) + ": negative label");
        r.location = fields[2];
        r.timestamp = parse_int(fields[3], "timestamp, row " + std::to_string(line_no));
        require<IngestError>(std::filesystem::exists(r.file),
                             "row " + std::to_string(line_no) +
                                 ": missing image file " + r.file.string());
        rows.push_back(std::move(r));
    }
    require<IngestError>(!rows.empty(), "metadata CSV has no data rows");

    // Location strings map to dense ids in first-seen order.
    std::map<std::string, std::int64_t> location_ids;
    Index height = 0, width = 0;
    Dataset ds(1, 1, 3); // replaced after the first image fixes the size
    bool first = true;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        Index h = 0, w = 0;
        Vec img = read_png(rows[i].file, h, w);
        if (first) {
            height = h;
            width = w;
            ds = Dataset(height, width, 3);
            first = false;
        } else {
            require<IngestError>(h == height && w == width,
                                 "inconsistent image size in " + rows[i].file.string());
        }
        auto [it, inserted] = location_ids.try_emplace(
            rows[i].location, static_cast<std::int64_t>(location_ids.size()));
        Sample s;
        s.image = std::move(img);
        s.label = rows[i].label;
        s.location_id = it->second;
        s.timestamp = rows[i].timestamp;
        ds.add(std::move(s));
        if (inserted) ds.set_location_name(it->second, rows[i].location);
    }
    return ds;
}

Dataset load_folder(const std::filesystem::path& dir)
{
    return load_folder(dir, dir / "metadata.csv");
}

void export_folder(const Dataset& ds, const std::filesystem::path& dir)
{
    require<ContractViolation>(ds.channels() == 3, "folder export requires RGB datasets");
    std::filesystem::create_directories(dir / "images");
    std::ofstream csv(dir / "metadata.csv", std::ios::trunc);
    require<IngestError>(csv.good(), "cannot write metadata.csv under " + dir.string());
    csv << "path,label,location_id,timestamp\n";
    for (Index i = 0; i < ds.size(); ++i) {
        const Sample& s = ds[i];
        char name[64];
        std::snprintf(name, sizeof(name), "images/%06lld.png", static_cast<long long>(i));
        write_png(dir / name, s.image, ds.height(), ds.width());
        csv << name << ',' << s.label << ',' << ds.location_name(s.location_id) << ','
            << s.timestamp << '\n';
    }
    require<IngestError>(csv.good(), "failed writing metadata.csv");
}

} // namespace clab::data
