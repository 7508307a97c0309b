#pragma once

#include "terrasemi/appearance.hpp"
#include "terrasemi/container.hpp"
#include "terrasemi/datakit.hpp"
#include "terrasemi/digest.hpp"
#include "terrasemi/error.hpp"
#include "terrasemi/fixmatch.hpp"
#include "terrasemi/geometry.hpp"
#include "terrasemi/image.hpp"
#include "terrasemi/metrics.hpp"
#include "terrasemi/parallel.hpp"
#include "terrasemi/policies.hpp"
#include "terrasemi/presets.hpp"
#include "terrasemi/rng.hpp"
#include "terrasemi/simclr.hpp"
#include "terrasemi/synthetic.hpp"
