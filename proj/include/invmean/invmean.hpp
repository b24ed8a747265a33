#pragma once

#include "invmean/certificate.hpp"
#include "invmean/error.hpp"
#include "invmean/family.hpp"
#include "invmean/generator.hpp"
#include "invmean/invariance.hpp"
#include "invmean/measure.hpp"
#include "invmean/parallel.hpp"
#include "invmean/qa.hpp"
#include "invmean/root_finding.hpp"
#include "invmean/separation.hpp"
