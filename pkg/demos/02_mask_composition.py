"""
Inpainting masks from person and skin segmentations
===================================================

The region handed to an inpainting model is the intersection of a person
mask and a skin mask, grown by one ring of pixels so the edit blends past
the segmentation boundary.
"""

import numpy as np

from cfaudit import BinaryMask, compose_inpaint_mask, coverage, dilate_3x3


def show(mask, label):
    art = "\n".join("".join("#" if v else "." for v in row) for row in mask.bits)
    print(f"{label} (coverage {coverage(mask):.3f})")
    print(art)
    print()


# A toy 12x12 scene: the person occupies a tall rectangle, the skin
# detector fires on the face and one hand.
person_bits = np.zeros((12, 12), dtype=bool)
person_bits[2:11, 4:9] = True
skin_bits = np.zeros((12, 12), dtype=bool)
skin_bits[2:5, 5:8] = True    # face
skin_bits[7:9, 2:6] = True    # hand, partly outside the person box

person = BinaryMask(bits=person_bits)
skin = BinaryMask(bits=skin_bits)
show(person, "person")
show(skin, "skin")

# Intersection keeps only skin that belongs to the detected person.
inpaint = compose_inpaint_mask(person, skin)
show(inpaint, "person AND skin")

# One dilation pass adds the blending ring.
show(dilate_3x3(inpaint), "dilated once")

# The union variant exists for ablations; it leaks the stray hand pixels.
show(compose_inpaint_mask(person, skin, combine="union"), "person OR skin")
