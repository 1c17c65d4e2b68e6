"""gibbsmap: images and preimages of Gibbs measures for almost-additive potentials under factor maps of subshifts."""

__version__ = "0.1.0"
__author__ = "Mike Carifio <mike@carif.io>"
