#include "generation/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <vector>

#include <json.hpp>

#include "error.hpp"
#include "random.hpp"

namespace polyg2p {

namespace {

constexpr char kMagic[8] = {'P', 'G', '2', 'P', 'C', 'K', 'P', 'T'};

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

template <class T>
void put(std::ostream& out, T value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <class T>
T get(std::istream& in) {
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) throw Error(ErrorKind::Checkpoint, "truncated checkpoint");
  return value;
}

std::string norm_name(NormPlacement n) { return n == NormPlacement::Pre ? "pre" : "post"; }

}  // namespace

void save_checkpoint(const ToyModel& model, const std::filesystem::path& path) {
  nlohmann::ordered_json header;
  const auto& c = model.config;
  header["config"] = {{"vocab_size", c.vocab_size}, {"n_layers", c.n_layers},   {"d_model", c.d_model},
                      {"n_heads", c.n_heads},       {"d_ff", c.d_ff},           {"max_seq_len", c.max_seq_len},
                      {"prefix_len", c.prefix_len}, {"seed", c.seed},           {"norm", norm_name(c.norm)}};
  std::vector<std::uint32_t> symbols;
  for (char32_t cp : model.vocab.symbols()) symbols.push_back(static_cast<std::uint32_t>(cp));
  header["vocab"] = symbols;
  auto tensors = nlohmann::ordered_json::array();
  model.params.for_each([&](const TensorInfo& info, const Matrix& m) {
    tensors.push_back({{"name", info.name}, {"rows", m.rows()}, {"cols", m.cols()}});
  });
  header["tensors"] = tensors;
  const std::string header_text = header.dump();

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::Io, "cannot write checkpoint " + path.string());
  out.write(kMagic, sizeof(kMagic));
  put<std::uint32_t>(out, kCheckpointFormatVersion);
  put<std::uint64_t>(out, header_text.size());
  out.write(header_text.data(), static_cast<std::streamsize>(header_text.size()));
  std::uint64_t checksum = 0xcbf29ce484222325ULL;
  model.params.for_each([&](const TensorInfo&, const Matrix& m) {
    const auto bytes = static_cast<std::size_t>(m.size()) * sizeof(double);
    out.write(reinterpret_cast<const char*>(m.data()), static_cast<std::streamsize>(bytes));
    checksum = fnv1a({reinterpret_cast<const unsigned char*>(m.data()), bytes}, checksum);
  });
  put<std::uint64_t>(out, checksum);
  if (!out) throw Error(ErrorKind::Io, "write failed for " + path.string());
}

ToyModel load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open checkpoint " + path.string());
  char magic[sizeof(kMagic)] = {};
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw Error(ErrorKind::Checkpoint, path.string() + " is not a polyg2p checkpoint");
  }
  const auto version = get<std::uint32_t>(in);
  if (version != kCheckpointFormatVersion) {
    throw Error(ErrorKind::Checkpoint, "unsupported checkpoint format version " + std::to_string(version));
  }
  const auto header_len = get<std::uint64_t>(in);
  if (header_len > (1ULL << 30)) throw Error(ErrorKind::Checkpoint, "implausible header length");
  std::string header_text(header_len, '\0');
  in.read(header_text.data(), static_cast<std::streamsize>(header_len));
  if (!in) throw Error(ErrorKind::Checkpoint, "truncated checkpoint header");

  ToyModel model;
  try {
    const auto header = nlohmann::json::parse(header_text);
    const auto& jc = header.at("config");
    auto& c = model.config;
    c.vocab_size = jc.at("vocab_size").get<int>();
    c.n_layers = jc.at("n_layers").get<int>();
    c.d_model = jc.at("d_model").get<int>();
    c.n_heads = jc.at("n_heads").get<int>();
    c.d_ff = jc.at("d_ff").get<int>();
    c.max_seq_len = jc.at("max_seq_len").get<int>();
    c.prefix_len = jc.at("prefix_len").get<int>();
    c.seed = jc.at("seed").get<std::uint64_t>();
    c.norm = jc.at("norm").get<std::string>() == "post" ? NormPlacement::Post : NormPlacement::Pre;
    c.validate();
    std::vector<char32_t> symbols;
    for (auto cp : header.at("vocab").get<std::vector<std::uint32_t>>()) symbols.push_back(static_cast<char32_t>(cp));
    model.vocab = Vocabulary::from_symbols(std::move(symbols));
    if (model.vocab.size() != c.vocab_size) throw Error(ErrorKind::Checkpoint, "vocabulary size mismatch");

    model.params = ModelParams::zeros(c);
    const auto& tensors = header.at("tensors");
    std::size_t index = 0;
    model.params.for_each([&](const TensorInfo& info, Matrix& m) {
      if (index >= tensors.size()) throw Error(ErrorKind::Checkpoint, "checkpoint lacks tensor " + info.name);
      const auto& t = tensors[index++];
      if (t.at("name").get<std::string>() != info.name || t.at("rows").get<Eigen::Index>() != m.rows() ||
          t.at("cols").get<Eigen::Index>() != m.cols()) {
        throw Error(ErrorKind::Checkpoint, "tensor " + info.name + " does not match the configuration");
      }
    });
    if (index != tensors.size()) throw Error(ErrorKind::Checkpoint, "checkpoint has extra tensors");
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Checkpoint, std::string("bad checkpoint header: ") + e.what());
  }

  std::uint64_t checksum = 0xcbf29ce484222325ULL;
  model.params.for_each([&](const TensorInfo& info, Matrix& m) {
    const auto bytes = static_cast<std::size_t>(m.size()) * sizeof(double);
    in.read(reinterpret_cast<char*>(m.data()), static_cast<std::streamsize>(bytes));
    if (!in) throw Error(ErrorKind::Checkpoint, "truncated tensor " + info.name);
    checksum = fnv1a({reinterpret_cast<const unsigned char*>(m.data()), bytes}, checksum);
  });
  if (get<std::uint64_t>(in) != checksum) throw Error(ErrorKind::Checkpoint, "tensor checksum mismatch");
  return model;
}

}  // namespace polyg2p
