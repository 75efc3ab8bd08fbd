#include "mns/idx.hpp"

#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <vector>

namespace mns {

namespace {

constexpr std::uint32_t kImageMagic = 0x00000803;
constexpr std::uint32_t kLabelMagic = 0x00000801;

std::uint32_t read_u32_be(std::ifstream& in, const std::string& path) {
    unsigned char b[4];
    const auto offset = static_cast<long long>(in.tellg());
    if (!in.read(reinterpret_cast<char*>(b), 4))
        throw std::runtime_error(path + ": truncated header at byte offset " +
                                 std::to_string(offset));
    return (static_cast<std::uint32_t>(b[0]) << 24) | (static_cast<std::uint32_t>(b[1]) << 16) |
           (static_cast<std::uint32_t>(b[2]) << 8) | static_cast<std::uint32_t>(b[3]);
}

} // namespace

LabeledDataset load_idx_images(const std::string& images_path, const std::string& labels_path,
                               std::size_t limit, bool normalize) {
    if (limit == 0) throw std::invalid_argument("load_idx_images: limit must be positive");

    std::ifstream img(images_path, std::ios::binary);
    if (!img) throw std::runtime_error("cannot open for reading: " + images_path);
    std::ifstream lab(labels_path, std::ios::binary);
    if (!lab) throw std::runtime_error("cannot open for reading: " + labels_path);

    const std::uint32_t img_magic = read_u32_be(img, images_path);
    if (img_magic != kImageMagic)
        throw std::runtime_error(images_path + ": bad magic at byte offset 0 (got " +
                                 std::to_string(img_magic) + ")");
    const std::uint32_t img_count = read_u32_be(img, images_path);
    const std::uint32_t rows = read_u32_be(img, images_path);
    const std::uint32_t cols = read_u32_be(img, images_path);

    const std::uint32_t lab_magic = read_u32_be(lab, labels_path);
    if (lab_magic != kLabelMagic)
        throw std::runtime_error(labels_path + ": bad magic at byte offset 0 (got " +
                                 std::to_string(lab_magic) + ")");
    const std::uint32_t lab_count = read_u32_be(lab, labels_path);
    if (lab_count != img_count)
        throw std::runtime_error(labels_path + ": label count " + std::to_string(lab_count) +
                                 " != image count " + std::to_string(img_count));
    if (img_count == 0 || rows == 0 || cols == 0)
        throw std::runtime_error(images_path + ": empty image payload");

    const std::size_t n = std::min<std::size_t>(limit, img_count);
    const std::size_t dim = static_cast<std::size_t>(rows) * cols;

    LabeledDataset data;
    data.X = Matrix(n, dim);
    data.labels.resize(n);

    std::vector<unsigned char> pixels(dim);
    int max_label = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const auto img_offset = static_cast<long long>(img.tellg());
        if (!img.read(reinterpret_cast<char*>(pixels.data()),
                      static_cast<std::streamsize>(dim)))
            throw std::runtime_error(images_path + ": truncated payload at byte offset " +
                                     std::to_string(img_offset));
        auto row = data.X.row(i);
        for (std::size_t j = 0; j < dim; ++j)
            row[j] = normalize ? static_cast<double>(pixels[j]) / 255.0
                               : static_cast<double>(pixels[j]);

        const auto lab_offset = static_cast<long long>(lab.tellg());
        unsigned char y;
        if (!lab.read(reinterpret_cast<char*>(&y), 1))
            throw std::runtime_error(labels_path + ": truncated payload at byte offset " +
                                     std::to_string(lab_offset));
        data.labels[i] = static_cast<int>(y) + 1;  // 1-based classes
        max_label = std::max(max_label, data.labels[i]);
    }
    data.num_classes = static_cast<std::size_t>(max_label);
    data.validate();
    return data;
}

} // namespace mns
