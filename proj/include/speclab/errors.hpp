#pragma once

#include <stdexcept>
#include <string>

namespace speclab {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

#define SPECLAB_ERROR(NAME)                       \
    struct NAME : Error {                         \
        using Error::Error;                       \
    }

// symbol_geometry
SPECLAB_ERROR(OutOfBand);
SPECLAB_ERROR(MultiplicityViolation);
SPECLAB_ERROR(PairTooFar);

// operator_assembly
SPECLAB_ERROR(TruncationTooSmall);
SPECLAB_ERROR(DeltaWindowEmpty);
SPECLAB_ERROR(RejectedDraw);

// spectral_backend
SPECLAB_ERROR(ConvergenceFailure);
SPECLAB_ERROR(DimensionCap);
SPECLAB_ERROR(DegenerateGap);

// quasimode_gramian
SPECLAB_ERROR(MixedRun);
SPECLAB_ERROR(StepTooCoarse);
SPECLAB_ERROR(PairTooClose);
SPECLAB_ERROR(SingularA);
SPECLAB_ERROR(TooLarge);

// density_theory
SPECLAB_ERROR(PairCoincident);

// statistics
SPECLAB_ERROR(TooFewTrials);
SPECLAB_ERROR(EmptyRecords);
SPECLAB_ERROR(ErosionTooLarge);
SPECLAB_ERROR(MismatchedConfig);

// monte_carlo / cli
SPECLAB_ERROR(IncompatibleManifest);
SPECLAB_ERROR(ConfigInvalid);

#undef SPECLAB_ERROR

} // namespace speclab
