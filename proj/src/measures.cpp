#include "catdist/measures.hpp"

#include "catdist/assoc_measures.hpp"
#include "catdist/cooccur.hpp"
#include "catdist/error.hpp"
#include "catdist/indep_measures.hpp"

namespace catdist {

namespace {

BlockDiagonalDelta build_unsupervised(const MeasureSpec& spec, const CategoricalDataset& ds) {
    const auto& schema = ds.variables();
    switch (spec.measure) {
        case Measure::Matching:
            return build_matching(schema);
        case Measure::Eskin:
            return build_eskin(schema);
        case Measure::Ordered:
            return build_ordered(schema);
        case Measure::Association: {
            const CooccurrenceModel model = build_cooccurrence(ds);
            const Index q = ds.n_variables();
            WeightMatrix w = spec.weights ? WeightMatrix(*spec.weights)
                             : spec.weight_preset == WeightPreset::Mean ? WeightMatrix::mean(q)
                                                                        : WeightMatrix::ones(q);
            return build_delta_association(model, schema, spec.phi, w);
        }
        default:
            break;
    }
    const MarginalTable m = build_marginals(ds);
    switch (spec.measure) {
        case Measure::Lin:
            return build_lin(schema, m, spec.lin_guard);
        case Measure::Iof:
            return build_iof(schema, m);
        case Measure::Of:
            return build_of(schema, m);
        case Measure::Goodall1:
            return build_goodall(schema, m, 1);
        case Measure::Goodall2:
            return build_goodall(schema, m, 2);
        case Measure::Goodall3:
            return build_goodall(schema, m, 3);
        case Measure::Goodall4:
            return build_goodall(schema, m, 4);
        case Measure::Ve:
            return build_variability(schema, m, Variability::Entropy);
        case Measure::Vm:
            return build_variability(schema, m, Variability::Mutability);
        default:
            throw UsageError("unhandled measure");
    }
}

}  // namespace

BlockDiagonalDelta build_delta(const MeasureSpec& spec, const CategoricalDataset& train, const Labeling* labels) {
    BlockDiagonalDelta delta;
    if (spec.association() && spec.supervised != SupervisedMode::None) {
        CategoricalDataset with_response = train;
        if (!train.response_index()) {
            if (!labels) throw UsageError("measure '" + spec.name() + "' needs response labels");
            with_response = append_response(train, *labels);
        } else if (*train.response_index() + 1 != train.n_variables()) {
            with_response = append_response(train.predictors(),
                                            Labeling{std::vector<Code>(train.codes(*train.response_index()).begin(),
                                                                       train.codes(*train.response_index()).end()),
                                                     train.variable(*train.response_index()).levels});
        }
        delta = build_delta_supervised(with_response, spec.phi, spec.supervised);
        delta.source_fingerprint = train.predictors().fingerprint();
    } else {
        const CategoricalDataset predictors = train.predictors();
        delta = build_unsupervised(spec, predictors);
        delta.source_fingerprint = spec.data_dependent() ? predictors.fingerprint() : 0;
    }
    auto notes = std::move(delta.notes);
    delta.spec = spec;
    delta.notes = std::move(notes);
    return delta;
}

}  // namespace catdist
