#pragma once

#include <cctype>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>

#include "kdenoise/image.hpp"

namespace kdn {

enum class PgmFormat { P2, P5 };

namespace detail {

// Reads the next header token, skipping whitespace and '#' comments.
inline std::string pgm_token(std::istream& in, const std::string& path) {
    std::string tok;
    int c = in.get();
    while (c != EOF) {
        if (c == '#') {
            while (c != EOF && c != '\n') c = in.get();
        } else if (std::isspace(c)) {
            c = in.get();
        } else {
            break;
        }
    }
    while (c != EOF && !std::isspace(c)) {
        tok.push_back(static_cast<char>(c));
        c = in.get();
    }
    if (tok.empty())
        throw IoError("malformed PGM header in " + path);
    return tok;
}

inline long pgm_int(std::istream& in, const std::string& path) {
    const std::string tok = pgm_token(in, path);
    try {
        std::size_t pos = 0;
        const long v = std::stol(tok, &pos);
        if (pos != tok.size()) throw std::invalid_argument(tok);
        return v;
    } catch (const std::exception&) {
        throw IoError("malformed PGM header in " + path + ": bad integer '" + tok + "'");
    }
}

} // namespace detail

// Reads a P2 (ASCII) or P5 (binary) PGM file. Samples are scaled by maxval
// into [0,1]; 16-bit P5 samples are big-endian. Physical dimensions default
// to the unit square.
inline GrayscaleImage read_pgm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open " + path);

    const std::string magic = detail::pgm_token(in, path);
    if (magic != "P2" && magic != "P5")
        throw IoError("unsupported image format in " + path + " (expected PGM P2 or P5)");

    const long cols = detail::pgm_int(in, path);
    const long rows = detail::pgm_int(in, path);
    const long maxval = detail::pgm_int(in, path);
    if (cols < 1 || rows < 1 || maxval < 1 || maxval > 65535)
        throw IoError("malformed PGM header in " + path + ": bad dimensions or maxval");

    std::vector<double> values;
    values.reserve(static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols));
    const double scale = 1.0 / static_cast<double>(maxval);

    if (magic == "P2") {
        for (long k = 0; k < rows * cols; ++k) {
            long v = 0;
            if (!(in >> v))
                throw IoError("truncated P2 data in " + path);
            values.push_back(static_cast<double>(v) * scale);
        }
    } else {
        // exactly one whitespace byte separates maxval from the raster
        const int bytes = maxval > 255 ? 2 : 1;
        std::vector<unsigned char> buf(static_cast<std::size_t>(rows * cols) * bytes);
        in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
        if (in.gcount() != static_cast<std::streamsize>(buf.size()))
            throw IoError("truncated P5 data in " + path);
        for (long k = 0; k < rows * cols; ++k) {
            long v;
            if (bytes == 2)
                v = (static_cast<long>(buf[2 * k]) << 8) | buf[2 * k + 1];
            else
                v = buf[k];
            values.push_back(static_cast<double>(v) * scale);
        }
    }

    return GrayscaleImage(static_cast<int>(rows), static_cast<int>(cols), 1.0, 1.0,
                          std::move(values));
}

// Writes a PGM file. Values are clipped to [0,1] here and nowhere else in
// the pipeline, then quantized against maxval.
inline void write_pgm(const GrayscaleImage& img, const std::string& path,
                      PgmFormat format = PgmFormat::P5, int maxval = 65535) {
    if (maxval < 1 || maxval > 65535)
        throw std::invalid_argument("write_pgm: maxval must be in [1, 65535]");

    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw IoError("cannot open " + path + " for writing");

    out << (format == PgmFormat::P2 ? "P2" : "P5") << "\n"
        << img.cols() << " " << img.rows() << "\n"
        << maxval << "\n";

    auto quantize = [&](double v) -> long {
        const double c = std::min(1.0, std::max(0.0, v));
        return std::lround(c * static_cast<double>(maxval));
    };

    if (format == PgmFormat::P2) {
        int on_line = 0;
        for (std::size_t k = 0; k < img.pixel_count(); ++k) {
            out << quantize(img.values()[k]);
            if (++on_line == 12) {
                out << "\n";
                on_line = 0;
            } else {
                out << " ";
            }
        }
        if (on_line != 0) out << "\n";
    } else {
        const int bytes = maxval > 255 ? 2 : 1;
        std::vector<unsigned char> buf;
        buf.reserve(img.pixel_count() * bytes);
        for (std::size_t k = 0; k < img.pixel_count(); ++k) {
            const long q = quantize(img.values()[k]);
            if (bytes == 2) {
                buf.push_back(static_cast<unsigned char>((q >> 8) & 0xFF));
                buf.push_back(static_cast<unsigned char>(q & 0xFF));
            } else {
                buf.push_back(static_cast<unsigned char>(q & 0xFF));
            }
        }
        out.write(reinterpret_cast<const char*>(buf.data()),
                  static_cast<std::streamsize>(buf.size()));
    }

    if (!out)
        throw IoError("failed writing " + path);
}

inline GrayscaleImage read_image(const std::string& path) { return read_pgm(path); }

inline void write_image(const GrayscaleImage& img, const std::string& path,
                        PgmFormat format = PgmFormat::P5, int maxval = 65535) {
    write_pgm(img, path, format, maxval);
}

} // namespace kdn
