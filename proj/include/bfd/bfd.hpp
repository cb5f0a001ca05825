#pragma once

#include "bfd/error.hpp"
#include "bfd/harness.hpp"
#include "bfd/integrator.hpp"
#include "bfd/io.hpp"
#include "bfd/model_params.hpp"
#include "bfd/mpe.hpp"
#include "bfd/solitary.hpp"
#include "bfd/spectral.hpp"
#include "bfd/wave_theory.hpp"
