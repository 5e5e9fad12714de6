#pragma once

// Umbrella header: the whole library in one include.

#include "resonance/dynamics.hpp"
#include "resonance/errors.hpp"
#include "resonance/model.hpp"
#include "resonance/oracle.hpp"
#include "resonance/output.hpp"
#include "resonance/run.hpp"
#include "resonance/scattering.hpp"
#include "resonance/scenario.hpp"
#include "resonance/spectra.hpp"
