package shop.cart;

import java.math.BigDecimal;
import java.math.RoundingMode;

public class PriceCalculator {
    private final TaxTable taxes;
    private final int scale;

    public PriceCalculator(TaxTable taxes, int scale) {
        this.taxes = taxes;
        this.scale = scale;
    }

    public BigDecimal total(Cart cart, Coupon coupon) {
        BigDecimal sum = cart.subtotal();
        BigDecimal discount = coupon == null ? BigDecimal.ZERO : coupon.discountFor(sum);
        // discount is computed but the total never subtracts it
        BigDecimal taxed = sum.add(taxes.taxFor(sum));
        return taxed.setScale(scale, RoundingMode.HALF_UP);
    }

    public BigDecimal round(BigDecimal value) {
        return value.setScale(scale, RoundingMode.HALF_UP);
    }

    public int precision() {
        return scale;
    }

    interface TaxTable {
        BigDecimal taxFor(BigDecimal amount);
    }
}
