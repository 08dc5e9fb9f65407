#include "inbd/model.hpp"

#include <cstring>
#include <fstream>

namespace inbd {

Param& ModelParams::add(const std::string& name, Tensor t) {
    auto [it, inserted] = params.emplace(name, Param(std::move(t)));
    if (!inserted) throw ConfigInvalid("duplicate parameter: " + name);
    return it->second;
}

Param& ModelParams::get(const std::string& name) {
    auto it = params.find(name);
    if (it == params.end()) throw ConfigInvalid("missing parameter: " + name);
    return it->second;
}

const Param& ModelParams::get(const std::string& name) const {
    auto it = params.find(name);
    if (it == params.end()) throw ConfigInvalid("missing parameter: " + name);
    return it->second;
}

void ModelParams::zero_grads() {
    for (auto& [_, p] : params) p.zero_grad();
}

size_t ModelParams::scalar_count() const {
    size_t n = 0;
    for (const auto& [_, p] : params) n += p.value.numel();
    return n;
}

namespace {
void write_u32(std::ostream& os, uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                          static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
    os.write(reinterpret_cast<char*>(b), 4);
}
uint32_t read_u32(std::istream& is) {
    unsigned char b[4];
    is.read(reinterpret_cast<char*>(b), 4);
    if (!is) throw IOError("truncated parameter file");
    return uint32_t(b[0]) | uint32_t(b[1]) << 8 | uint32_t(b[2]) << 16 | uint32_t(b[3]) << 24;
}
}  // namespace

void ModelParams::save(const std::string& path) const {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IOError("cannot write " + path);
    os.write("INBD", 4);
    write_u32(os, 1);
    for (const auto& [name, p] : params) {
        write_u32(os, static_cast<uint32_t>(name.size()));
        os.write(name.data(), static_cast<std::streamsize>(name.size()));
        write_u32(os, static_cast<uint32_t>(p.value.shape.size()));
        for (int d : p.value.shape) write_u32(os, static_cast<uint32_t>(d));
        std::vector<float> f(p.value.v.begin(), p.value.v.end());
        os.write(reinterpret_cast<const char*>(f.data()),
                 static_cast<std::streamsize>(f.size() * sizeof(float)));
    }
    if (!os) throw IOError("write failed: " + path);
}

ModelParams ModelParams::load(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IOError("cannot read " + path);
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, "INBD", 4) != 0) throw IOError("not an INBD parameter file: " + path);
    const uint32_t version = read_u32(is);
    if (version != 1) throw IOError("unsupported parameter file version");
    ModelParams mp;
    while (true) {
        unsigned char peek_byte;
        is.read(reinterpret_cast<char*>(&peek_byte), 1);
        if (is.eof()) break;
        is.putback(static_cast<char>(peek_byte));
        const uint32_t name_len = read_u32(is);
        std::string name(name_len, '\0');
        is.read(name.data(), name_len);
        const uint32_t rank = read_u32(is);
        std::vector<int> shape(rank);
        for (uint32_t i = 0; i < rank; ++i) shape[i] = static_cast<int>(read_u32(is));
        Tensor t(shape);
        std::vector<float> f(t.numel());
        is.read(reinterpret_cast<char*>(f.data()), static_cast<std::streamsize>(f.size() * sizeof(float)));
        if (!is) throw IOError("truncated parameter file: " + path);
        std::copy(f.begin(), f.end(), t.v.begin());
        mp.add(name, std::move(t));
    }
    return mp;
}

void init_conv(ModelParams& mp, std::mt19937_64& rng, const std::string& prefix,
               int out_ch, int in_ch, int kh, int kw) {
    Tensor w({out_ch, in_ch, kh, kw});
    const real stddev = std::sqrt(2.0 / (in_ch * kh * kw));
    std::normal_distribution<real> dist(0.0, stddev);
    for (real& v : w.v) v = dist(rng);
    mp.add(prefix + ".w", std::move(w));
    mp.add(prefix + ".b", Tensor({out_ch}));
}

// ---------------------------------------------------------------------------

namespace {
Var conv_in_relu(Graph& g, Var x, ModelParams& mp, const std::string& prefix, int sr, int sa,
                 bool circular) {
    Var y = g.conv2d(x, g.param(mp.get(prefix + ".w")), g.param(mp.get(prefix + ".b")), sr, sa, circular);
    return g.relu(g.instance_norm(y));
}
}  // namespace

void SegNet::init(ModelParams& mp, std::mt19937_64& rng) {
    init_conv(mp, rng, "f.enc1", 16, 3, 3, 3);
    init_conv(mp, rng, "f.enc2", 32, 16, 3, 3);
    init_conv(mp, rng, "f.mid", 32, 32, 3, 3);
    init_conv(mp, rng, "f.up.reduce", 16, 48, 1, 1);
    init_conv(mp, rng, "f.up.conv", 16, 16, 3, 3);
    init_conv(mp, rng, "f.head", 3, 16, 1, 1);
}

Var SegNet::forward(Graph& g, Var x, ModelParams& mp) {
    const int H = x->value.shape[1], W = x->value.shape[2];
    Var e1 = conv_in_relu(g, x, mp, "f.enc1", 1, 1, false);
    Var e2 = conv_in_relu(g, e1, mp, "f.enc2", 2, 2, false);
    Var mid = conv_in_relu(g, e2, mp, "f.mid", 1, 1, false);
    Var up = g.upsample_to(mid, H, W);
    Var cat = g.concat_channels({up, e1});
    Var red = g.conv2d(cat, g.param(mp.get("f.up.reduce.w")), g.param(mp.get("f.up.reduce.b")), 1, 1, false);
    Var d = conv_in_relu(g, red, mp, "f.up.conv", 1, 1, false);
    return g.conv2d(d, g.param(mp.get("f.head.w")), g.param(mp.get("f.head.b")), 1, 1, false);
}

Var segmentation_loss_graph(Graph& g, Var logits, const Tensor& target_bg, const Tensor& target_bd,
                            const Tensor& target_ct) {
    const auto& s = logits->value.shape;
    if (s.size() != 3 || s[0] != 3) throw ShapeMismatch("segmentation_loss: expects [3,H,W] logits");
    const size_t sp = static_cast<size_t>(s[1]) * s[2];
    if (target_bg.numel() != sp || target_bd.numel() != sp || target_ct.numel() != sp)
        throw ShapeMismatch("segmentation_loss: target size mismatch");
    Var bg = g.select_channel3(logits, 0);
    Var bd = g.select_channel3(logits, 1);
    Var ct = g.select_channel3(logits, 2);
    Var ce_bg = g.bce_with_logits(bg, target_bg);
    Var dice_bd = g.dice_of_probs(g.sigmoid(bd), target_bd);
    Var ce_ct = g.bce_with_logits(ct, target_ct);
    return g.combine({ce_bg, dice_bd, ce_ct},
                     {SEG_LOSS_WEIGHTS[0], SEG_LOSS_WEIGHTS[1], SEG_LOSS_WEIGHTS[2]});
}

// ---------------------------------------------------------------------------

void INBDNet::init(ModelParams& mp, std::mt19937_64& rng) {
    init_conv(mp, rng, "g.enc1", 16, 7, 3, 3);
    init_conv(mp, rng, "g.enc2", 32, 16, 3, 3);
    init_conv(mp, rng, "g.enc3", 64, 32, 3, 3);
    // UpBlock 1: 64 up, concat 32 -> reduce to 32, circular 3x3
    init_conv(mp, rng, "g.up1.reduce", 32, 96, 1, 1);
    init_conv(mp, rng, "g.up1.conv", 32, 32, 3, 3);
    // UpBlock 2: 32 up, concat 16 -> reduce to 16, circular 3x3
    init_conv(mp, rng, "g.up2.reduce", 16, 48, 1, 1);
    init_conv(mp, rng, "g.up2.conv", 16, 16, 3, 3);
    // WRD head
    init_conv(mp, rng, "g.wrd1", 8, 16, 1, 1);
    init_conv(mp, rng, "g.wrd2", 8, 8, 1, 1);
    init_conv(mp, rng, "g.wrd3", 2, 8, 1, 1);
    // classification layer over decoder features + broadcast WRD signal
    init_conv(mp, rng, "g.head", 2, 17, 1, 1);
}

WRDSignal wrd_recurrence(Graph& g, Var omega_plus, Var omega_minus, real beta) {
    WRDSignal sig;
    sig.omega_plus = omega_plus;
    sig.omega_minus = omega_minus;
    sig.beta = beta;
    Var step = g.axpby(g.sigmoid(omega_plus), g.sigmoid(omega_minus), 1.0, -1.0);
    sig.omega_raw = g.shifted_cumsum(step, beta);
    sig.omega = g.sub_max(sig.omega_raw);
    return sig;
}

INBDForward INBDNet::forward(Graph& g, Var patch, ModelParams& mp, real beta) {
    const auto& s = patch->value.shape;
    if (s.size() != 3 || s[0] != 7) throw ShapeMismatch("inbd_forward: expects [7,N,M] patch");
    const int N = s[1], M = s[2];

    Var e1 = conv_in_relu(g, patch, mp, "g.enc1", 1, 1, true);
    Var e2 = conv_in_relu(g, e1, mp, "g.enc2", 2, 2, true);
    Var e3 = conv_in_relu(g, e2, mp, "g.enc3", 2, 2, true);

    Var u1 = g.upsample_to(e3, e2->value.shape[1], e2->value.shape[2]);
    Var c1 = g.concat_channels({u1, e2});
    Var r1 = g.conv2d(c1, g.param(mp.get("g.up1.reduce.w")), g.param(mp.get("g.up1.reduce.b")), 1, 1, true);
    Var d2 = conv_in_relu(g, r1, mp, "g.up1.conv", 1, 1, true);

    Var u2 = g.upsample_to(d2, N, M);
    Var c2 = g.concat_channels({u2, e1});
    Var r2 = g.conv2d(c2, g.param(mp.get("g.up2.reduce.w")), g.param(mp.get("g.up2.reduce.b")), 1, 1, true);
    Var d1 = conv_in_relu(g, r2, mp, "g.up2.conv", 1, 1, true);

    // WRD head on the final decoder features
    Var w = g.maxpool_radial2(d1);
    w = conv_in_relu(g, w, mp, "g.wrd1", 1, 1, true);
    w = g.maxpool_radial2(w);
    w = conv_in_relu(g, w, mp, "g.wrd2", 1, 1, true);
    w = g.conv2d(w, g.param(mp.get("g.wrd3.w")), g.param(mp.get("g.wrd3.b")), 1, 1, true);
    Var means = g.radial_mean(w);  // [2,M]
    WRDSignal sig = wrd_recurrence(g, g.select_row(means, 0), g.select_row(means, 1), beta);

    Var head_in = g.concat_channels({d1, g.broadcast_row(sig.omega, N)});
    Var logits = g.conv2d(head_in, g.param(mp.get("g.head.w")), g.param(mp.get("g.head.b")), 1, 1, true);

    INBDForward out;
    out.logits = logits;
    out.wrd = sig;
    return out;
}

Var wrd_loss_graph(Graph& g, Var omega_raw, const Tensor& target_row) {
    return g.bce_with_logits(omega_raw, target_row);
}

real wrd_training_beta(const Tensor& target_row) {
    return target_row.v[0] > 0.5 ? 15.0 : -15.0;
}

Var total_loss_graph(Graph& g, Var logits, const Tensor& target_cells, Var omega_raw,
                     const Tensor& target_row) {
    Var ce = g.softmax_ce2(logits, target_cells);
    Var lw = wrd_loss_graph(g, omega_raw, target_row);
    return g.combine({ce, lw}, {1.0, LAMBDA_WRD});
}

}  // namespace inbd
