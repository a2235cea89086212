#include "ark/footprint.hpp"

#include <cmath>
#include <sstream>

namespace ark::footprint {

SizeModel calibrate(std::int64_t overhead2, std::int64_t p2tr2, std::int64_t anchor2)
{
    SizeModel m;
    m.overhead2 = overhead2;
    m.p2tr_out2 = p2tr2;
    m.anchor_out2 = anchor2;
    m.keypath_in2 = 197 * 2 - overhead2 - 3 * p2tr2;
    m.scriptpath_in2 = 107 * 2 - overhead2 - p2tr2 - anchor2;
    if (overhead2 + m.scriptpath_in2 + 2 * p2tr2 + anchor2 != 150 * 2)
        throw Error(Errc::InvalidArgument, "calibration system is inconsistent");
    return m;
}

const SizeModel& model()
{
    static const SizeModel m = calibrate();
    return m;
}

std::int64_t vbytes(const Shape& s, const SizeModel& m)
{
    if (s.keypath_ins < 0 || s.scriptpath_ins < 0 || s.p2tr_outs < 0 || s.anchor_outs < 0)
        throw Error(Errc::InvalidArgument, "negative shape count");
    if (s.keypath_ins + s.scriptpath_ins < 1) throw Error(Errc::InvalidArgument, "shape without inputs");
    std::int64_t half = m.overhead2 + s.keypath_ins * m.keypath_in2 + s.scriptpath_ins * m.scriptpath_in2 +
                        s.p2tr_outs * m.p2tr_out2 + s.anchor_outs * m.anchor_out2;
    return (half + 1) / 2;
}

int ceil_log2(std::int64_t n)
{
    if (n < 1) throw Error(Errc::InvalidArgument, "n must be positive");
    int d = 0;
    while ((std::int64_t{1} << d) < n) ++d;
    return d;
}

std::int64_t exit_vbytes(std::int64_t n)
{
    return ceil_log2(n) * vbytes({0, 1, 2, 1}) + vbytes({0, 1, 1, 1});
}

static Amount sats(std::int64_t vb, double fee_rate)
{
    if (fee_rate < 0) throw Error(Errc::InvalidArgument, "negative fee rate");
    return static_cast<Amount>(std::ceil(static_cast<double>(vb) * fee_rate - 1e-9));
}

Amount exit_cost(std::int64_t n, double fee_rate) { return sats(exit_vbytes(n), fee_rate); }

static bool is_anchor(const Output& o)
{
    return o.value == 0 && !o.lock.internal_key && o.lock.paths.size() == 1 &&
           o.lock.paths[0].kind == script::Kind::AlwaysTrue;
}

Shape shape_of(const Tx& tx)
{
    Shape s;
    for (auto& w : tx.wits) (w.path ? s.scriptpath_ins : s.keypath_ins) += 1;
    for (auto& o : tx.outs) (is_anchor(o) ? s.anchor_outs : s.p2tr_outs) += 1;
    return s;
}

Amount fee_for(const Tx& tx, double fee_rate) { return sats(vbytes(shape_of(tx)), fee_rate); }

std::string cost_table_csv(const std::vector<std::int64_t>& ns, double fee_rate)
{
    std::ostringstream out;
    out << "n,depth,vB,sats\n";
    for (auto n : ns) out << n << ',' << ceil_log2(n) << ',' << exit_vbytes(n) << ',' << exit_cost(n, fee_rate) << '\n';
    return out.str();
}

} // namespace ark::footprint
