#pragma once

#include <stdexcept>
#include <string>

namespace rdr {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

#define RDR_DEFINE_ERROR(NAME)      \
    struct NAME : Error {           \
        using Error::Error;         \
    }

RDR_DEFINE_ERROR(DimensionMismatch);
RDR_DEFINE_ERROR(ScalarKindMismatch);
RDR_DEFINE_ERROR(NonFinite);
RDR_DEFINE_ERROR(RankDeficient);
RDR_DEFINE_ERROR(InvalidParams);
RDR_DEFINE_ERROR(EmptySet);
RDR_DEFINE_ERROR(NotOnSet);
RDR_DEFINE_ERROR(InvalidStepsize);
RDR_DEFINE_ERROR(NotAffine);
RDR_DEFINE_ERROR(OutOfDomain);
RDR_DEFINE_ERROR(NoSamples);
RDR_DEFINE_ERROR(InsufficientData);
RDR_DEFINE_ERROR(NonConvexInput);
RDR_DEFINE_ERROR(LambdaOne);
RDR_DEFINE_ERROR(DegenerateNormals);
RDR_DEFINE_ERROR(InvalidShape);
RDR_DEFINE_ERROR(ParseError);
RDR_DEFINE_ERROR(VersionMismatch);
RDR_DEFINE_ERROR(FileError);

#undef RDR_DEFINE_ERROR

} // namespace rdr
