#include "tubepose/ply.hpp"

#include "tubepose/error.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

namespace tubepose {

namespace {

enum class ScalarType { Int8, UInt8, Int16, UInt16, Int32, UInt32, Float32, Float64 };

std::optional<ScalarType> parse_type(const std::string& name) {
    if (name == "char" || name == "int8") return ScalarType::Int8;
    if (name == "uchar" || name == "uint8") return ScalarType::UInt8;
    if (name == "short" || name == "int16") return ScalarType::Int16;
    if (name == "ushort" || name == "uint16") return ScalarType::UInt16;
    if (name == "int" || name == "int32") return ScalarType::Int32;
    if (name == "uint" || name == "uint32") return ScalarType::UInt32;
    if (name == "float" || name == "float32") return ScalarType::Float32;
    if (name == "double" || name == "float64") return ScalarType::Float64;
    return std::nullopt;
}

std::size_t type_size(ScalarType t) {
    switch (t) {
        case ScalarType::Int8:
        case ScalarType::UInt8: return 1;
        case ScalarType::Int16:
        case ScalarType::UInt16: return 2;
        case ScalarType::Int32:
        case ScalarType::UInt32:
        case ScalarType::Float32: return 4;
        case ScalarType::Float64: return 8;
    }
    return 0;
}

struct Property {
    std::string name;
    ScalarType type = ScalarType::Float32;
    bool is_list = false;
    ScalarType count_type = ScalarType::UInt8;
};

struct Element {
    std::string name;
    std::size_t count = 0;
    std::vector<Property> properties;
};

struct Header {
    bool ascii = false;
    std::vector<Element> elements;
    std::size_t bytes = 0;
    std::size_t lines = 0;
};

[[noreturn]] void header_error(std::size_t line, const std::string& what) {
    throw Error(ErrorCode::ParseError, "PLY header line " + std::to_string(line) + ": " + what);
}

Header parse_header(std::istream& in) {
    Header h;
    std::string line;
    bool have_format = false;
    while (std::getline(in, line)) {
        ++h.lines;
        h.bytes += line.size() + (in.eof() ? 0 : 1);
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::istringstream ss(line);
        std::string word;
        ss >> word;
        if (h.lines == 1) {
            if (word != "ply") header_error(1, "missing 'ply' magic");
            continue;
        }
        if (word.empty() || word == "comment" || word == "obj_info") continue;
        if (word == "format") {
            std::string fmt, version;
            ss >> fmt >> version;
            if (fmt == "ascii") {
                h.ascii = true;
            } else if (fmt == "binary_little_endian") {
                h.ascii = false;
            } else if (fmt == "binary_big_endian") {
                throw Error(ErrorCode::UnsupportedFormat, "big-endian PLY is not supported");
            } else {
                header_error(h.lines, "unknown format '" + fmt + "'");
            }
            have_format = true;
        } else if (word == "element") {
            Element e;
            long long count = -1;
            ss >> e.name >> count;
            if (e.name.empty() || !ss || count < 0) header_error(h.lines, "malformed element declaration");
            e.count = static_cast<std::size_t>(count);
            h.elements.push_back(std::move(e));
        } else if (word == "property") {
            if (h.elements.empty()) header_error(h.lines, "property before any element");
            Property p;
            std::string type;
            ss >> type;
            if (type == "list") {
                std::string count_type, item_type;
                ss >> count_type >> item_type >> p.name;
                const auto ct = parse_type(count_type);
                const auto it = parse_type(item_type);
                if (!ct || !it || p.name.empty()) header_error(h.lines, "malformed list property");
                p.is_list = true;
                p.count_type = *ct;
                p.type = *it;
            } else {
                ss >> p.name;
                const auto t = parse_type(type);
                if (!t || p.name.empty()) header_error(h.lines, "malformed property '" + type + "'");
                p.type = *t;
            }
            h.elements.back().properties.push_back(std::move(p));
        } else if (word == "end_header") {
            if (!have_format) header_error(h.lines, "missing format line");
            return h;
        } else {
            header_error(h.lines, "unexpected keyword '" + word + "'");
        }
    }
    throw Error(ErrorCode::ParseError, "PLY header ended after line " + std::to_string(h.lines) + " without end_header");
}

struct XyzLayout {
    std::size_t vertex_element = 0;
    std::array<std::size_t, 3> property{};
};

XyzLayout locate_xyz(const Header& h) {
    XyzLayout layout;
    bool found = false;
    for (std::size_t e = 0; e < h.elements.size(); ++e) {
        if (h.elements[e].name == "vertex") {
            layout.vertex_element = e;
            found = true;
            break;
        }
    }
    if (!found) throw Error(ErrorCode::ParseError, "PLY has no vertex element");
    const auto& props = h.elements[layout.vertex_element].properties;
    const char* names[3] = {"x", "y", "z"};
    for (int a = 0; a < 3; ++a) {
        const auto it = std::find_if(props.begin(), props.end(), [&](const Property& p) { return p.name == names[a]; });
        if (it == props.end()) throw Error(ErrorCode::ParseError, std::string("PLY vertex has no '") + names[a] + "' property");
        if (it->is_list || (it->type != ScalarType::Float32 && it->type != ScalarType::Float64)) {
            throw Error(ErrorCode::UnsupportedFormat, std::string("PLY vertex '") + names[a] + "' must be float or double");
        }
        layout.property[static_cast<std::size_t>(a)] = static_cast<std::size_t>(it - props.begin());
    }
    return layout;
}

template <class T>
T load_le(const unsigned char* p) {
    unsigned char bytes[sizeof(T)];
    std::memcpy(bytes, p, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
    T v;
    std::memcpy(&v, bytes, sizeof(T));
    return v;
}

template <class T>
void store_le(std::ostream& out, T v) {
    unsigned char bytes[sizeof(T)];
    std::memcpy(bytes, &v, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
    out.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

std::uint64_t load_count(const unsigned char* p, ScalarType t) {
    switch (t) {
        case ScalarType::Int8: return static_cast<std::uint64_t>(std::max<std::int8_t>(0, load_le<std::int8_t>(p)));
        case ScalarType::UInt8: return load_le<std::uint8_t>(p);
        case ScalarType::Int16: return static_cast<std::uint64_t>(std::max<std::int16_t>(0, load_le<std::int16_t>(p)));
        case ScalarType::UInt16: return load_le<std::uint16_t>(p);
        case ScalarType::Int32: return static_cast<std::uint64_t>(std::max<std::int32_t>(0, load_le<std::int32_t>(p)));
        case ScalarType::UInt32: return load_le<std::uint32_t>(p);
        default: throw Error(ErrorCode::UnsupportedFormat, "PLY list count must be an integer type");
    }
}

PointCloud read_binary(std::istream& in, const Header& h, const XyzLayout& layout) {
    const std::vector<unsigned char> data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    std::size_t pos = 0;
    auto need = [&](std::size_t n, const std::string& what) {
        if (data.size() - pos < n) {
            throw Error(ErrorCode::ParseError, "truncated PLY binary payload in " + what + " at byte offset " +
                                                   std::to_string(h.bytes + pos) + ": expected " + std::to_string(n) +
                                                   " bytes, got " + std::to_string(data.size() - pos));
        }
    };

    PointCloud cloud;
    for (std::size_t e = 0; e <= layout.vertex_element; ++e) {
        const Element& el = h.elements[e];
        const bool has_list = std::any_of(el.properties.begin(), el.properties.end(), [](const Property& p) { return p.is_list; });
        const bool is_vertex = e == layout.vertex_element;
        if (!has_list) {
            std::size_t record = 0;
            for (const auto& p : el.properties) record += type_size(p.type);
            need(record * el.count, "element '" + el.name + "' (" + std::to_string(el.count) + " records of " +
                                        std::to_string(record) + " bytes)");
        }
        if (is_vertex) cloud.points.reserve(el.count);
        for (std::size_t r = 0; r < el.count; ++r) {
            Point3 p = Point3::Zero();
            for (std::size_t k = 0; k < el.properties.size(); ++k) {
                const Property& prop = el.properties[k];
                if (prop.is_list) {
                    need(type_size(prop.count_type), "list count of '" + prop.name + "'");
                    const std::uint64_t n = load_count(&data[pos], prop.count_type);
                    pos += type_size(prop.count_type);
                    need(n * type_size(prop.type), "list items of '" + prop.name + "'");
                    pos += n * type_size(prop.type);
                    continue;
                }
                const std::size_t size = type_size(prop.type);
                if (has_list) need(size, "property '" + prop.name + "'");
                if (is_vertex) {
                    for (int a = 0; a < 3; ++a) {
                        if (layout.property[static_cast<std::size_t>(a)] == k) {
                            p[a] = prop.type == ScalarType::Float64 ? load_le<double>(&data[pos])
                                                                    : static_cast<double>(load_le<float>(&data[pos]));
                        }
                    }
                }
                pos += size;
            }
            if (is_vertex) cloud.points.push_back(p);
        }
    }
    return cloud;
}

PointCloud read_ascii(std::istream& in, const Header& h, const XyzLayout& layout) {
    PointCloud cloud;
    std::size_t line_no = h.lines;
    std::string line;
    for (std::size_t e = 0; e <= layout.vertex_element; ++e) {
        const Element& el = h.elements[e];
        const bool is_vertex = e == layout.vertex_element;
        if (is_vertex) cloud.points.reserve(el.count);
        for (std::size_t r = 0; r < el.count; ++r) {
            ++line_no;
            if (!std::getline(in, line)) {
                throw Error(ErrorCode::ParseError, "PLY line " + std::to_string(line_no) + ": unexpected end of file, expected " +
                                                       std::to_string(el.count) + " '" + el.name + "' records, got " +
                                                       std::to_string(r));
            }
            if (!is_vertex) continue;
            std::vector<std::string_view> tokens;
            const char* s = line.data();
            const char* end = s + line.size();
            while (s < end) {
                while (s < end && (*s == ' ' || *s == '\t' || *s == '\r')) ++s;
                const char* t = s;
                while (s < end && *s != ' ' && *s != '\t' && *s != '\r') ++s;
                if (s > t) tokens.emplace_back(t, static_cast<std::size_t>(s - t));
            }
            Point3 p;
            for (int a = 0; a < 3; ++a) {
                const std::size_t k = layout.property[static_cast<std::size_t>(a)];
                // Scalar properties before k each take one token; lists before x/y/z are not supported.
                for (std::size_t j = 0; j < k; ++j) {
                    if (el.properties[j].is_list) {
                        throw Error(ErrorCode::UnsupportedFormat, "PLY ASCII vertex list before coordinates");
                    }
                }
                if (k >= tokens.size()) {
                    throw Error(ErrorCode::ParseError, "PLY line " + std::to_string(line_no) + ": expected at least " +
                                                           std::to_string(k + 1) + " values, got " + std::to_string(tokens.size()));
                }
                const auto tok = tokens[k];
                std::from_chars_result res;
                if (el.properties[k].type == ScalarType::Float32) {
                    float v = 0.0f;
                    res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
                    p[a] = v;
                } else {
                    double v = 0.0;
                    res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
                    p[a] = v;
                }
                if (res.ec != std::errc() || res.ptr != tok.data() + tok.size()) {
                    throw Error(ErrorCode::ParseError,
                                "PLY line " + std::to_string(line_no) + ": invalid number '" + std::string(tok) + "'");
                }
            }
            cloud.points.push_back(p);
        }
    }
    return cloud;
}

}  // namespace

PointCloud read_ply(std::istream& in) {
    const Header h = parse_header(in);
    const XyzLayout layout = locate_xyz(h);
    return h.ascii ? read_ascii(in, h, layout) : read_binary(in, h, layout);
}

PointCloud read_ply(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path.string() + "'");
    return read_ply(in);
}

void write_ply(std::ostream& out, const PointCloud& cloud, const PlyWriteOptions& options, const std::vector<Rgb>* colors) {
    if (colors && colors->size() != cloud.size()) {
        throw Error(ErrorCode::InvalidParameter, "color count does not match point count");
    }
    const bool f64 = options.scalar == PlyScalar::Float64;
    const char* type = f64 ? "double" : "float";
    out << "ply\n"
        << "format " << (options.encoding == PlyEncoding::Ascii ? "ascii" : "binary_little_endian") << " 1.0\n"
        << "element vertex " << cloud.size() << "\n"
        << "property " << type << " x\n"
        << "property " << type << " y\n"
        << "property " << type << " z\n";
    if (colors) out << "property uchar red\nproperty uchar green\nproperty uchar blue\n";
    out << "end_header\n";

    if (options.encoding == PlyEncoding::Ascii) {
        char buf[64];
        for (std::size_t i = 0; i < cloud.size(); ++i) {
            for (int a = 0; a < 3; ++a) {
                const auto res = f64 ? std::to_chars(buf, buf + sizeof buf, cloud[i][a])
                                     : std::to_chars(buf, buf + sizeof buf, static_cast<float>(cloud[i][a]));
                if (a) out << ' ';
                out.write(buf, res.ptr - buf);
            }
            if (colors) {
                const Rgb& c = (*colors)[i];
                out << ' ' << int(c[0]) << ' ' << int(c[1]) << ' ' << int(c[2]);
            }
            out << '\n';
        }
    } else {
        for (std::size_t i = 0; i < cloud.size(); ++i) {
            for (int a = 0; a < 3; ++a) {
                if (f64) {
                    store_le<double>(out, cloud[i][a]);
                } else {
                    store_le<float>(out, static_cast<float>(cloud[i][a]));
                }
            }
            if (colors) out.write(reinterpret_cast<const char*>((*colors)[i].data()), 3);
        }
    }
    if (!out) throw Error(ErrorCode::IoError, "failed writing PLY data");
}

void write_ply(const std::filesystem::path& path, const PointCloud& cloud, const PlyWriteOptions& options,
               const std::vector<Rgb>* colors) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot write '" + path.string() + "'");
    write_ply(out, cloud, options, colors);
}

}  // namespace tubepose
